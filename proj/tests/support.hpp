#pragma once

// Shared helpers for unit and acceptance tests: fixture access, random corpus
// construction and independent reference implementations ("oracles") that
// share no code with the library beyond its plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ritual/corpus.hpp"
#include "ritual/index.hpp"

namespace testsupport {

inline std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(RITUAL_FIXTURES) / name;
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open fixture " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static int counter = 0;
        std::random_device rd;
        path = std::filesystem::temp_directory_path() /
               ("ritual-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

/// Rituals fixture corpus (concepts + contexts + shots).
inline ritual::CorpusParts rituals_parts(bool with_shots = true) {
    ritual::CorpusParts parts;
    parts.concepts = ritual::parse_concept_video_file(slurp(fixture("rituals/concepts.xml")));
    parts.contexts = ritual::parse_context_file(slurp(fixture("rituals/contexts.xml")));
    if (with_shots) parts.shot_listings = ritual::parse_concept_shot_file(slurp(fixture("rituals/shots.xml")));
    parts.videos = ritual::videos_from_concepts(parts.concepts);
    return parts;
}

inline std::shared_ptr<const ritual::Corpus> rituals_corpus(bool with_shots = true) {
    return std::make_shared<const ritual::Corpus>(ritual::finalize(rituals_parts(with_shots)));
}

inline std::string pad_video(std::size_t n) {
    std::string s = std::to_string(n);
    return std::string(s.size() < 5 ? 5 - s.size() : 0, '0') + s;
}

/// Random concept/context files over `n_videos` x `n_concepts`. Weights are
/// drawn from a coarse grid so that equal scores (and thus tie-breaking)
/// actually occur.
inline ritual::CorpusParts random_parts(std::mt19937_64& rng, std::size_t n_videos, std::size_t n_concepts,
                                        double density = 0.15) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> grid(1, 10);
    std::uniform_int_distribution<int> shots(1, 8);
    std::vector<int> n_shots(n_videos + 1);
    for (std::size_t v = 1; v <= n_videos; ++v) n_shots[v] = shots(rng);

    ritual::CorpusParts parts;
    for (std::size_t c = 1; c <= n_concepts; ++c) {
        ritual::Concept concept_;
        concept_.id = static_cast<ritual::ConceptId>(c);
        concept_.labels["ar"] = "مفهوم" + std::to_string(c);
        for (std::size_t v = 1; v <= n_videos; ++v) {
            if (unit(rng) >= density) continue;
            ritual::VideoRef ref;
            ref.video_num = pad_video(v);
            ref.name = "VIDEO_" + pad_video(v);
            ref.weight = grid(rng) / 10.0;
            ref.number_shots = n_shots[v];
            ref.shot_repres = "shot" + pad_video(v) + "_1";
            concept_.videos.push_back(std::move(ref));
        }
        parts.concepts.push_back(std::move(concept_));
    }
    parts.videos = ritual::videos_from_concepts(parts.concepts);

    std::uniform_int_distribution<std::size_t> pick(1, n_concepts);
    const std::size_t n_ctx = std::max<std::size_t>(1, n_concepts / 10);
    for (std::size_t k = 1; k <= n_ctx; ++k) {
        ritual::Context ctx;
        ctx.id = static_cast<ritual::ContextId>(k);
        ctx.name = "سياق" + std::to_string(k);
        std::set<std::size_t> members;
        for (int i = 0; i < 4; ++i) members.insert(pick(rng));
        for (std::size_t m : members) {
            ctx.members.push_back({static_cast<ritual::ConceptId>(m), "مفهوم" + std::to_string(m), grid(rng) / 10.0, {}});
        }
        ctx.nbr_concept = static_cast<int>(ctx.members.size());
        parts.contexts.push_back(std::move(ctx));
    }
    return parts;
}

/// Random query vector over concept ids 1..n_concepts.
inline ritual::SparseVector random_query(std::mt19937_64& rng, std::size_t n_concepts, std::size_t max_terms = 4) {
    std::uniform_int_distribution<std::size_t> pick(1, n_concepts);
    std::uniform_int_distribution<std::size_t> count(1, max_terms);
    std::uniform_int_distribution<int> grid(1, 4);
    ritual::SparseVector q;
    for (std::size_t i = count(rng); i > 0; --i) q[static_cast<ritual::ConceptId>(pick(rng))] = grid(rng) * 0.5;
    return q;
}

namespace oracle {

struct Scored {
    std::string video_num;
    double score;
};

/// Exhaustive cosine ranking. `docs` lists every video (ascending video
/// number) with its weight vector. The query is first divided by its largest
/// component (the engine's canonical scale); each video's dot product is
/// summed over the query concepts in ascending id order, and both norms as
/// the root of the sum of squares in ascending id order.
inline std::vector<Scored> rank(const std::vector<std::pair<std::string, ritual::SparseVector>>& docs,
                                const ritual::SparseVector& raw_q, std::size_t k,
                                const std::set<std::string>* allowed = nullptr) {
    double top = 0.0;
    for (const auto& [c, w] : raw_q) top = std::max(top, w);
    ritual::SparseVector q;
    for (const auto& [c, w] : raw_q) {
        if (w > 0.0) q[c] = w / top;
    }
    double qs = 0.0;
    for (const auto& [c, w] : q) qs += w * w;
    const double qn = std::sqrt(qs);
    std::vector<std::pair<std::size_t, Scored>> all;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const auto& [num, d] = docs[i];
        if (allowed && !allowed->count(num)) continue;
        double dot = 0.0;
        bool shared = false;
        for (const auto& [c, qw] : q) {
            if (!(qw > 0.0)) continue;
            auto it = d.find(c);
            if (it == d.end() || !(it->second > 0.0)) continue;
            shared = true;
            dot += qw * it->second;
        }
        if (!shared) continue;
        double ds = 0.0;
        for (const auto& [c, w] : d) ds += w * w;
        double s = dot / (qn * std::sqrt(ds));
        s = s < 0.0 ? 0.0 : (s > 1.0 ? 1.0 : s);
        all.push_back({i, {num, s}});
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.second.score != b.second.score) return a.second.score > b.second.score;
        return a.first < b.first;
    });
    std::vector<Scored> out;
    for (std::size_t i = 0; i < all.size() && i < k; ++i) out.push_back(all[i].second);
    return out;
}

/// Every video's weight vector, straight from the corpus (precomputed mode).
inline std::vector<std::pair<std::string, ritual::SparseVector>> doc_table(const ritual::Corpus& corpus) {
    std::vector<std::pair<std::string, ritual::SparseVector>> docs;
    for (const auto& [_, v] : corpus.videos()) {
        ritual::SparseVector vec;
        for (const auto& [c, w] : v.concept_weights) {
            if (w > 0.0) vec[c] = w;
        }
        docs.emplace_back(v.video_num, std::move(vec));
    }
    return docs;
}

/// TF-IDF from raw inputs: shot listings (marker = concept id), per-video
/// shot counts. tf = distinct labelled shots / shots, idf = ln(N / df).
inline std::map<std::string, std::map<int, double>> tfidf(const std::vector<ritual::ShotListing>& listings,
                                                          const std::map<std::string, int>& n_shots) {
    std::map<std::string, std::map<int, std::set<std::string>>> labels; // video -> concept -> shots
    for (const auto& l : listings) {
        int c = std::stoi(l.marker);
        for (const auto& s : l.shots) {
            // shot<video>_<n>
            std::string id = s.shot_id.substr(4);
            std::string video = id.substr(0, id.rfind('_'));
            while (video.size() > 1 && video[0] == '0') video.erase(0, 1);
            labels[video][c].insert(s.shot_id);
        }
    }
    std::map<int, int> df;
    for (const auto& [v, cs] : labels) {
        for (const auto& [c, shots] : cs) {
            if (!shots.empty()) ++df[c];
        }
    }
    const double n = static_cast<double>(n_shots.size());
    std::map<std::string, std::map<int, double>> out;
    for (const auto& [v, shots_total] : n_shots) {
        std::string key = v;
        while (key.size() > 1 && key[0] == '0') key.erase(0, 1);
        auto& row = out[v];
        auto it = labels.find(key);
        if (it == labels.end()) continue;
        for (const auto& [c, shots] : it->second) {
            double tf = static_cast<double>(shots.size()) / shots_total;
            row[c] = tf * std::log(n / df[c]);
        }
    }
    return out;
}

/// Precision/recall by direct counting with linear membership scans.
inline std::pair<double, double> precision_recall(const std::vector<std::string>& ranking,
                                                  const std::vector<std::string>& relevant, std::size_t cutoff) {
    std::size_t returned = std::min(cutoff, ranking.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < returned; ++i) {
        if (std::find(relevant.begin(), relevant.end(), ranking[i]) != relevant.end()) ++hits;
    }
    double p = returned == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(returned);
    double r = static_cast<double>(hits) / static_cast<double>(relevant.size());
    return {p, r};
}

} // namespace oracle

} // namespace testsupport
