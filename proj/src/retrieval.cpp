#include "ritual/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include "ritual/error.hpp"

namespace ritual {

namespace {

double norm_of(const SparseVector& v) {
    double sum = 0.0;
    for (const auto& [_, w] : v) sum += w * w;
    return std::sqrt(sum);
}

double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

// Query divided by its largest component, non-positive entries dropped.
// Division is correctly rounded, so q and any exactly representable
// multiple k*q map to the same vector: scores are then bitwise invariant
// under query scaling, which the feedback recurrence relies on.
SparseVector unit_max(const SparseVector& q) {
    double top = 0.0;
    for (const auto& [_, w] : q) top = std::max(top, w);
    SparseVector out;
    if (!(top > 0.0)) return out;
    for (const auto& [id, w] : q) {
        if (w > 0.0) out.emplace_hint(out.end(), id, w / top);
    }
    return out;
}

} // namespace

QueryState initial_query(std::string raw_text, const std::set<ConceptId>& selected,
                         const std::map<ConceptId, double>& expansion, double alpha) {
    if (!(alpha >= 0.0)) throw DomainError("alpha must be non-negative");
    QueryState state;
    state.raw_text = std::move(raw_text);
    state.alpha = alpha;
    state.selected_concepts = selected;
    for (ConceptId id : selected) state.p_initial[id] = 1.0;
    for (const auto& [id, w] : expansion) {
        if (!(w > 0.0)) continue;
        double& slot = state.p_initial[id];
        slot = std::max(slot, w);
    }
    state.pq = state.p_initial;
    return state;
}

double cosine(const SparseVector& raw_q, const SparseVector& d) {
    const SparseVector q = unit_max(raw_q);
    double dot = 0.0;
    auto qi = q.begin();
    auto di = d.begin();
    while (qi != q.end() && di != d.end()) {
        if (qi->first < di->first) {
            ++qi;
        } else if (di->first < qi->first) {
            ++di;
        } else {
            dot += qi->second * di->second;
            ++qi;
            ++di;
        }
    }
    double denom = norm_of(q) * norm_of(d);
    if (!(denom > 0.0)) return 0.0;
    return clamp_unit(dot / denom);
}

std::vector<RankedResult> search(const IndexedCorpus& index, const QueryState& state,
                                 const SearchOptions& options) {
    if (options.k == 0) throw DomainError("k must be at least 1");

    std::optional<std::vector<bool>> allowed;
    if (options.context) {
        const Context* ctx = index.corpus().find_context(*options.context);
        if (ctx == nullptr) throw LookupError("unknown context " + std::to_string(*options.context));
        allowed.emplace(index.size(), false);
        for (const auto& m : ctx->members) {
            for (const Posting& p : index.postings(m.concept_id)) (*allowed)[p.doc] = true;
        }
    }

    const SparseVector q = unit_max(state.pq);
    const double q_norm = norm_of(q);
    if (!(q_norm > 0.0)) return {};

    // Accumulate dot products concept by concept in ascending id order.
    std::vector<double> dot(index.size(), 0.0);
    std::vector<char> seen(index.size(), 0);
    std::vector<DocIndex> touched;
    for (const auto& [cid, qw] : q) {
        for (const Posting& p : index.postings(cid)) {
            if (allowed && !(*allowed)[p.doc]) continue;
            if (!seen[p.doc]) {
                seen[p.doc] = 1;
                touched.push_back(p.doc);
            }
            dot[p.doc] += qw * p.weight;
        }
    }

    struct Scored {
        DocIndex doc;
        double score;
    };
    std::vector<Scored> scored;
    scored.reserve(touched.size());
    for (DocIndex doc : touched) {
        scored.push_back({doc, clamp_unit(dot[doc] / (q_norm * index.doc_norm(doc)))});
    }
    auto better = [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc < b.doc;
    };
    std::size_t k = std::min(options.k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(), better);
    scored.resize(k);

    std::vector<RankedResult> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto& s = scored[i];
        RankedResult r;
        r.rank = i + 1;
        r.video_num = index.video_num(s.doc);
        r.score = s.score;
        const double denom = q_norm * index.doc_norm(s.doc);
        const SparseVector& d = index.doc_vector(s.doc);
        for (const auto& [cid, qw] : q) {
            auto it = d.find(cid);
            if (it != d.end()) r.matched_concepts.emplace_back(cid, qw * it->second / denom);
        }
        out.push_back(std::move(r));
    }
    return out;
}

QueryState feedback_update(const QueryState& state, const JudgmentSet& judgments,
                           std::span<const std::string> presented, const IndexedCorpus& index) {
    VideoSet shown(presented.begin(), presented.end());
    std::vector<std::string> problems;
    for (const auto& v : judgments.positives) {
        if (!shown.count(v)) problems.push_back("video " + v + " was not presented");
        if (judgments.negatives.count(v)) problems.push_back("video " + v + " judged both relevant and irrelevant");
    }
    for (const auto& v : judgments.negatives) {
        if (!shown.count(v)) problems.push_back("video " + v + " was not presented");
    }
    if (!problems.empty()) {
        std::string msg = "invalid judgments:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ValidationError(msg);
    }

    auto concepts_of = [&](const VideoSet& videos) {
        std::set<ConceptId> out;
        for (const auto& v : videos) {
            auto doc = index.find(v);
            if (!doc) throw LookupError("unknown video " + v);
            for (const auto& [cid, w] : index.doc_vector(*doc)) {
                if (w > 0.0) out.insert(cid);
            }
        }
        return out;
    };

    QueryState next = state;
    next.iteration = state.iteration + 1;
    next.p_fb = state.pq;

    SparseVector base = state.p_initial;
    for (const auto& [cid, w] : next.p_fb) base[cid] += w;
    for (ConceptId cid : concepts_of(judgments.positives)) base[cid] += state.alpha;
    for (ConceptId cid : concepts_of(judgments.negatives)) base[cid] -= state.alpha;
    std::erase_if(base, [](const auto& kv) { return !(kv.second > 0.0); });
    next.pq = std::move(base);
    return next;
}

std::vector<std::string> presented_window(const std::vector<RankedResult>& results, std::size_t window) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < results.size() && i < window; ++i) out.push_back(results[i].video_num);
    return out;
}

} // namespace ritual
