#pragma once

// Query vectors, cosine ranking over the inverted index and the iterative
// relevance-feedback recurrence
//
//   PQ_0 = P_initial
//   PQ_i = P_initial + PQ_{i-1} (+alpha on concepts of judged-relevant
//          videos, -alpha on concepts of judged-irrelevant videos)
//
// with components clamped at zero.

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ritual/index.hpp"

namespace ritual {

inline constexpr double kDefaultAlpha = 0.02;
inline constexpr std::size_t kDefaultK = 30;
inline constexpr std::size_t kJudgeWindow = 30;

struct QueryState {
    int iteration = 0;
    std::string raw_text;
    SparseVector p_initial;
    /// Feedback carry: the previous iteration's pq. Empty at iteration 0.
    SparseVector p_fb;
    /// Effective query of this iteration.
    SparseVector pq;
    double alpha = kDefaultAlpha;
    std::set<ConceptId> selected_concepts;
};

/// Selected concepts at weight 1, expansion concepts at their expansion
/// weight, overlaps take the larger. Throws DomainError if alpha < 0.
QueryState initial_query(std::string raw_text, const std::set<ConceptId>& selected,
                         const std::map<ConceptId, double>& expansion = {}, double alpha = kDefaultAlpha);

/// Clamped to [0, 1]; 0 when either vector is zero. Non-positive query
/// components are ignored, and the query is scaled to a largest component
/// of 1 first, so q and k*q score bitwise identically when k*q is exact.
double cosine(const SparseVector& q, const SparseVector& d);

struct RankedResult {
    std::size_t rank = 0;
    std::string video_num;
    double score = 0.0;
    /// Per shared concept: q_c * d_c / (|q| |d|), ascending concept id.
    std::vector<std::pair<ConceptId, double>> matched_concepts;
};

struct SearchOptions {
    std::size_t k = kDefaultK;
    std::optional<ContextId> context;
};

/// Top-k videos by cosine(pq, d) among videos sharing at least one concept
/// with pq; ties by ascending video number. Throws LookupError for an
/// unknown context and DomainError for k == 0.
std::vector<RankedResult> search(const IndexedCorpus& index, const QueryState& state,
                                 const SearchOptions& options = {});

struct JudgmentSet {
    VideoSet positives;
    VideoSet negatives;
};

/// Next iteration's state. `presented` is the window the user judged (the
/// top results of the last search); judging anything outside it, or the
/// same video both ways, throws ValidationError.
QueryState feedback_update(const QueryState& state, const JudgmentSet& judgments,
                           std::span<const std::string> presented, const IndexedCorpus& index);

/// First min(window, results) video numbers of a ranking.
std::vector<std::string> presented_window(const std::vector<RankedResult>& results,
                                          std::size_t window = kJudgeWindow);

} // namespace ritual
