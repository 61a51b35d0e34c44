#pragma once

// Query-side text processing: tokenization, Arabic/English normalization,
// stop-word removal and the term -> concept lexicon.

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ritual/corpus.hpp"

namespace ritual {

enum class Lang { ar, en, unknown };

std::string_view to_string(Lang lang);

struct NormalizedTerm {
    std::string surface;
    std::string norm;
    Lang lang = Lang::unknown;

    friend bool operator==(const NormalizedTerm&, const NormalizedTerm&) = default;
};

/// Normalizes one token: Arabic diacritics and tatweel dropped, alef variants
/// folded to bare alef, alef maqsura to ya, ta marbuta to ha, leading
/// definite article removed while at least two letters remain; ASCII
/// lowercased. Idempotent.
std::string normalize_token(std::string_view token);

/// Whitespace/punctuation split, no normalization.
std::vector<std::string> tokenize(std::string_view text);

struct StopWords {
    std::set<std::string> ar;
    std::set<std::string> en;

    /// Small built-in lists, stored in normalized form.
    static StopWords defaults();
    /// One term per line, '#' comments. Terms are normalized on load.
    void add_from(std::string_view text, Lang lang);
    bool contains(std::string_view norm) const;
};

class TextNormalizer {
public:
    TextNormalizer() : stop_words_(StopWords::defaults()) {}
    explicit TextNormalizer(StopWords stop_words) : stop_words_(std::move(stop_words)) {}

    /// Tokenize, normalize, drop stop words. Every surviving term carries the
    /// same weight downstream.
    std::vector<NormalizedTerm> normalize(std::string_view text) const;

    const StopWords& stop_words() const noexcept { return stop_words_; }

private:
    StopWords stop_words_;
};

struct ConceptMatch {
    ConceptId concept_id = 0;
    double score = 0.0;

    friend bool operator==(const ConceptMatch&, const ConceptMatch&) = default;
};

/// "term TAB concept_id" lines, '#' comments.
std::vector<std::pair<std::string, ConceptId>> parse_synonyms(std::string_view text);

/// Normalized descriptor term -> concepts. Built from every concept label
/// (all languages) plus optional synonyms.
class Lexicon {
public:
    static Lexicon build(const Corpus& corpus, const TextNormalizer& normalizer,
                         const std::vector<std::pair<std::string, ConceptId>>& synonyms = {});

    const std::map<std::string, std::set<ConceptId>>& entries() const noexcept { return entries_; }
    const std::set<std::string>& descriptors(ConceptId id) const;

private:
    std::map<std::string, std::set<ConceptId>> entries_;
    std::map<ConceptId, std::set<std::string>> descriptors_;
};

/// Concepts whose descriptors intersect the query terms, scored by
/// |intersection| / |distinct query terms|, best first, ties by concept id.
std::vector<ConceptMatch> match_concepts(const std::vector<NormalizedTerm>& terms, const Lexicon& lexicon);

} // namespace ritual
