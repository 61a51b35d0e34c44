#pragma once

// Vector space over concepts: one sparse TF-IDF (or precomputed) weight
// vector per video, Euclidean norms, and concept -> video posting lists.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ritual/corpus.hpp"

namespace ritual {

using SparseVector = std::map<ConceptId, double>;

/// Dense position of a video; ascending DocIndex is ascending video number.
using DocIndex = std::uint32_t;

enum class WeightSource {
    precomputed, ///< weights verbatim from the concept description file
    recompute,   ///< tf = labelled shots / NUMBER_shots, times ln(N / df)
};

std::string_view to_string(WeightSource source);
WeightSource parse_weight_source(std::string_view text);

/// tf * ln(n_docs / df). Throws DomainError unless 1 <= df <= n_docs and
/// tf in [0, 1].
double tf_idf(double tf, std::size_t df, std::size_t n_docs);

struct Posting {
    DocIndex doc = 0;
    double weight = 0.0;
};

class IndexedCorpus {
public:
    const Corpus& corpus() const noexcept { return *corpus_; }
    std::shared_ptr<const Corpus> corpus_ptr() const noexcept { return corpus_; }
    WeightSource weight_source() const noexcept { return source_; }

    std::size_t size() const noexcept { return video_nums_.size(); }
    const std::string& video_num(DocIndex doc) const { return video_nums_.at(doc); }
    std::optional<DocIndex> find(std::string_view video_num) const;

    const SparseVector& doc_vector(DocIndex doc) const { return vectors_.at(doc); }
    double doc_norm(DocIndex doc) const { return norms_.at(doc); }
    /// Descending weight, ties by ascending video number.
    std::span<const Posting> postings(ConceptId id) const;
    /// Videos containing the concept (weight > 0 or labelled shots > 0).
    std::size_t df(ConceptId id) const;
    /// ln(N / df); empty when df == 0.
    std::optional<double> idf(ConceptId id) const;
    const std::map<ConceptId, std::vector<Posting>>& inverted() const noexcept { return inverted_; }

    /// Weight vectors -> norms, postings, df, idf. Used by build and by the
    /// cache loader.
    static IndexedCorpus from_vectors(std::shared_ptr<const Corpus> corpus, WeightSource source,
                                      std::vector<SparseVector> vectors);

private:
    IndexedCorpus() = default;

    std::shared_ptr<const Corpus> corpus_;
    WeightSource source_ = WeightSource::precomputed;
    std::vector<std::string> video_nums_;
    std::vector<SparseVector> vectors_;
    std::vector<double> norms_;
    std::map<ConceptId, std::vector<Posting>> inverted_;
    std::map<ConceptId, std::size_t> df_;
};

/// Throws ConfigError for `recompute` on a corpus without shot data.
IndexedCorpus build_index(std::shared_ptr<const Corpus> corpus, WeightSource source);

/// FNV-1a over the given byte strings (length-prefixed so boundaries count).
std::uint64_t content_hash(std::span<const std::string_view> parts);

inline constexpr std::uint32_t kIndexCacheVersion = 1;

/// "RSIX" magic, version, content hash, weight source, then every document
/// vector. Little-endian.
void write_index_cache(const IndexedCorpus& index, std::uint64_t hash, std::ostream& out);

/// Empty when the header, version or hash does not match; the caller
/// rebuilds in that case. Throws IoError on a truncated body.
std::optional<IndexedCorpus> read_index_cache(std::istream& in, std::shared_ptr<const Corpus> corpus,
                                              std::uint64_t expected_hash);

} // namespace ritual
