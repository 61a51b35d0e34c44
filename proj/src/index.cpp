#include "ritual/index.hpp"

#include <algorithm>
#include <bit>
#include <type_traits>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "ritual/error.hpp"

namespace ritual {

std::string_view to_string(WeightSource source) {
    return source == WeightSource::precomputed ? "precomputed" : "recompute";
}

WeightSource parse_weight_source(std::string_view text) {
    if (text == "precomputed") return WeightSource::precomputed;
    if (text == "recompute") return WeightSource::recompute;
    throw ConfigError("unknown weight source '" + std::string(text) + "' (precomputed|recompute)");
}

double tf_idf(double tf, std::size_t df, std::size_t n_docs) {
    if (df == 0 || df > n_docs) {
        throw DomainError("tf_idf: document frequency " + std::to_string(df) + " outside [1, " +
                          std::to_string(n_docs) + "]");
    }
    if (!(tf >= 0.0 && tf <= 1.0)) throw DomainError("tf_idf: tf must lie in [0, 1]");
    return tf * std::log(static_cast<double>(n_docs) / static_cast<double>(df));
}

std::optional<DocIndex> IndexedCorpus::find(std::string_view video_num) const {
    VideoNumLess less;
    auto it = std::lower_bound(video_nums_.begin(), video_nums_.end(), video_num,
                               [&](const std::string& a, std::string_view b) { return less(a, b); });
    if (it == video_nums_.end() || less(video_num, *it)) return std::nullopt;
    return static_cast<DocIndex>(it - video_nums_.begin());
}

std::span<const Posting> IndexedCorpus::postings(ConceptId id) const {
    auto it = inverted_.find(id);
    if (it == inverted_.end()) return {};
    return it->second;
}

std::size_t IndexedCorpus::df(ConceptId id) const {
    auto it = df_.find(id);
    return it == df_.end() ? 0 : it->second;
}

std::optional<double> IndexedCorpus::idf(ConceptId id) const {
    std::size_t d = df(id);
    if (d == 0) return std::nullopt;
    return std::log(static_cast<double>(size()) / static_cast<double>(d));
}

IndexedCorpus IndexedCorpus::from_vectors(std::shared_ptr<const Corpus> corpus, WeightSource source,
                                          std::vector<SparseVector> vectors) {
    if (vectors.size() != corpus->n_videos()) {
        throw Error("index has " + std::to_string(vectors.size()) + " vectors for " +
                    std::to_string(corpus->n_videos()) + " videos");
    }
    IndexedCorpus index;
    index.source_ = source;
    index.vectors_ = std::move(vectors);
    index.video_nums_.reserve(corpus->n_videos());
    index.norms_.reserve(corpus->n_videos());

    DocIndex doc = 0;
    for (const auto& [key, video] : corpus->videos()) {
        index.video_nums_.push_back(video.video_num);
        SparseVector& vec = index.vectors_[doc];
        std::erase_if(vec, [](const auto& kv) { return !(kv.second > 0.0); });
        double sum = 0.0;
        for (const auto& [cid, w] : vec) {
            sum += w * w;
            index.inverted_[cid].push_back({doc, w});
        }
        index.norms_.push_back(std::sqrt(sum));

        if (source == WeightSource::precomputed) {
            for (const auto& [cid, _] : video.concept_weights) ++index.df_[cid];
        } else {
            for (const auto& [cid, n] : video.labeled_shots) {
                if (n > 0) ++index.df_[cid];
            }
        }
        ++doc;
    }
    for (auto& [_, list] : index.inverted_) {
        std::stable_sort(list.begin(), list.end(),
                         [](const Posting& a, const Posting& b) { return a.weight > b.weight; });
    }
    index.corpus_ = std::move(corpus);
    return index;
}

IndexedCorpus build_index(std::shared_ptr<const Corpus> corpus, WeightSource source) {
    std::vector<SparseVector> vectors;
    vectors.reserve(corpus->n_videos());
    if (source == WeightSource::precomputed) {
        for (const auto& [_, video] : corpus->videos()) vectors.push_back(video.concept_weights);
        return IndexedCorpus::from_vectors(std::move(corpus), source, std::move(vectors));
    }

    if (!corpus->has_shot_data()) {
        throw ConfigError("recompute weighting needs the concept shot file (--shots)");
    }
    std::map<ConceptId, std::size_t> df;
    for (const auto& [_, video] : corpus->videos()) {
        for (const auto& [cid, n] : video.labeled_shots) {
            if (n > 0) ++df[cid];
        }
    }
    const std::size_t n_docs = corpus->n_videos();
    for (const auto& [_, video] : corpus->videos()) {
        SparseVector vec;
        for (const auto& [cid, n] : video.labeled_shots) {
            if (n <= 0) continue;
            double tf = static_cast<double>(n) / static_cast<double>(video.number_shots);
            double w = tf_idf(tf, df.at(cid), n_docs);
            if (w > 0.0) vec[cid] = w;
        }
        vectors.push_back(std::move(vec));
    }
    return IndexedCorpus::from_vectors(std::move(corpus), source, std::move(vectors));
}

std::uint64_t content_hash(std::span<const std::string_view> parts) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](unsigned char byte) {
        h ^= byte;
        h *= 0x100000001b3ULL;
    };
    for (auto part : parts) {
        std::uint64_t n = part.size();
        for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(n >> (8 * i)));
        for (char c : part) mix(static_cast<unsigned char>(c));
    }
    return h;
}

namespace {

constexpr char kMagic[4] = {'R', 'S', 'I', 'X'};

template <typename T>
std::uint64_t to_bits(T value) {
    if constexpr (std::is_floating_point_v<T>) {
        return std::bit_cast<std::uint64_t>(value);
    } else {
        return static_cast<std::uint64_t>(static_cast<std::make_unsigned_t<T>>(value));
    }
}

template <typename T>
void put(std::ostream& out, T value) {
    std::uint64_t bits = to_bits(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) out.put(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

template <typename T>
bool get(std::istream& in, T& value) {
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        int c = in.get();
        if (c == std::char_traits<char>::eof()) return false;
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    if constexpr (std::is_floating_point_v<T>) {
        value = std::bit_cast<T>(bits);
    } else {
        value = static_cast<T>(static_cast<std::make_unsigned_t<T>>(bits));
    }
    return true;
}

} // namespace

void write_index_cache(const IndexedCorpus& index, std::uint64_t hash, std::ostream& out) {
    out.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kIndexCacheVersion);
    put<std::uint64_t>(out, hash);
    put<std::uint8_t>(out, index.weight_source() == WeightSource::precomputed ? 0 : 1);
    put<std::uint64_t>(out, index.size());
    for (DocIndex d = 0; d < index.size(); ++d) {
        const std::string& num = index.video_num(d);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(num.size()));
        out.write(num.data(), static_cast<std::streamsize>(num.size()));
        const SparseVector& vec = index.doc_vector(d);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(vec.size()));
        for (const auto& [cid, w] : vec) {
            put<std::int32_t>(out, cid);
            put<double>(out, w);
        }
    }
    if (!out) throw IoError("failed writing index cache");
}

std::optional<IndexedCorpus> read_index_cache(std::istream& in, std::shared_ptr<const Corpus> corpus,
                                              std::uint64_t expected_hash) {
    char magic[4] = {};
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) return std::nullopt;
    std::uint32_t version = 0;
    std::uint64_t hash = 0;
    std::uint8_t source = 0;
    std::uint64_t n = 0;
    if (!get(in, version) || version != kIndexCacheVersion) return std::nullopt;
    if (!get(in, hash) || hash != expected_hash) return std::nullopt;
    if (!get(in, source) || source > 1 || !get(in, n) || n != corpus->n_videos()) return std::nullopt;

    auto truncated = [] { return IoError("index cache is truncated"); };
    std::vector<SparseVector> vectors(n);
    auto video = corpus->videos().begin();
    for (std::uint64_t d = 0; d < n; ++d, ++video) {
        std::uint32_t len = 0;
        if (!get(in, len)) throw truncated();
        std::string num(len, '\0');
        if (!in.read(num.data(), len)) throw truncated();
        if (num != video->second.video_num) return std::nullopt;
        std::uint32_t entries = 0;
        if (!get(in, entries)) throw truncated();
        for (std::uint32_t e = 0; e < entries; ++e) {
            std::int32_t cid = 0;
            double w = 0.0;
            if (!get(in, cid) || !get(in, w)) throw truncated();
            vectors[d][cid] = w;
        }
    }
    return IndexedCorpus::from_vectors(std::move(corpus), source == 0 ? WeightSource::precomputed
                                                                      : WeightSource::recompute,
                                       std::move(vectors));
}

} // namespace ritual
