#pragma once

// Everything a search needs, loaded from the corpus files: corpus, index,
// lexicon, ontology and the text normalizer. Immutable once loaded.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>

#include "ritual/corpus.hpp"
#include "ritual/index.hpp"
#include "ritual/ontology.hpp"
#include "ritual/retrieval.hpp"
#include "ritual/text.hpp"

namespace ritual {

struct EngineConfig {
    std::filesystem::path concepts;          ///< concept description file (required)
    std::optional<std::filesystem::path> contexts;
    std::optional<std::filesystem::path> shots;
    std::optional<std::filesystem::path> ontology;
    std::optional<std::filesystem::path> markers;
    std::optional<std::filesystem::path> stopwords_ar;
    std::optional<std::filesystem::path> stopwords_en;
    std::optional<std::filesystem::path> synonyms;
    /// Read if valid for the current files, otherwise rebuilt (and written
    /// when `write_cache` is set).
    std::optional<std::filesystem::path> index_cache;
    bool write_cache = false;
    WeightSource weight_source = WeightSource::precomputed;
    double attenuation = Ontology::kDefaultAttenuation;
};

/// Whole file as bytes. Throws IoError.
std::string read_file(const std::filesystem::path& path);

class Engine {
public:
    static std::shared_ptr<const Engine> load(const EngineConfig& config);
    /// In-memory variant used by tests and the Python bindings.
    static std::shared_ptr<const Engine> from_parts(IndexedCorpus index,
                                                    Ontology ontology, TextNormalizer normalizer = {},
                                                    const std::vector<std::pair<std::string, ConceptId>>& synonyms = {});

    const Corpus& corpus() const noexcept { return index_.corpus(); }
    const IndexedCorpus& index() const noexcept { return index_; }
    const Lexicon& lexicon() const noexcept { return lexicon_; }
    const Ontology& ontology() const noexcept { return ontology_; }
    const TextNormalizer& normalizer() const noexcept { return normalizer_; }
    std::uint64_t content_hash() const noexcept { return hash_; }
    bool loaded_from_cache() const noexcept { return from_cache_; }

    /// normalize + match_concepts.
    std::vector<ConceptMatch> suggest(std::string_view text) const;

    /// Initial query state from chosen concepts. With expand_depth > 0 the
    /// ontology expansion of the chosen concepts joins the query vector.
    /// Throws LookupError for concepts not in the corpus.
    QueryState make_query(std::string raw_text, const std::set<ConceptId>& chosen, int expand_depth = 0,
                          double alpha = kDefaultAlpha) const;

private:
    Engine(IndexedCorpus index, Lexicon lexicon, Ontology ontology, TextNormalizer normalizer)
        : index_(std::move(index)), lexicon_(std::move(lexicon)), ontology_(std::move(ontology)),
          normalizer_(std::move(normalizer)) {}

    IndexedCorpus index_;
    Lexicon lexicon_;
    Ontology ontology_;
    TextNormalizer normalizer_;
    std::uint64_t hash_ = 0;
    bool from_cache_ = false;
};

} // namespace ritual
