#pragma once

// Precision/recall over ranked lists, per-rank curves, qrels files and a
// simulated user that judges the top window against qrels and iterates the
// feedback loop.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ritual/retrieval.hpp"

namespace ritual {

/// query id -> relevant videos.
using Qrels = std::map<std::string, VideoSet>;

/// "query_id TAB video_num" per line, '#' comments.
Qrels parse_qrels(std::string_view text);
std::string serialize_qrels(const Qrels& qrels);

/// "query_id TAB text" per line, '#' comments. Order preserved.
std::vector<std::pair<std::string, std::string>> parse_queries(std::string_view text);

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
};

/// Over the first min(cutoff, |ranking|) entries: precision = relevant
/// retrieved / returned (0 when nothing returned), recall = relevant
/// retrieved / |relevant|. Throws EvaluationError for empty qrels or
/// cutoff == 0.
PrecisionRecall precision_recall(std::span<const std::string> ranking, const VideoSet& relevant,
                                 std::size_t cutoff);

struct PRPoint {
    std::size_t rank = 0;
    double recall = 0.0;
    double precision = 0.0;
};

struct PRCurve {
    std::string query_id;
    int iteration = 0;
    std::vector<PRPoint> points;
};

/// One point per rank 1..min(k, |ranking|).
PRCurve curve(std::span<const std::string> ranking, const VideoSet& relevant, std::size_t k,
              std::string query_id = {}, int iteration = 0);

/// "rank,recall,precision" header plus one row per point.
void write_curve_csv(const PRCurve& c, std::ostream& out);

struct SessionOptions {
    int iterations = 3;
    std::size_t judge_window = kJudgeWindow;
    /// Ranks evaluated per curve.
    std::size_t depth = kDefaultK;
    std::optional<ContextId> context;
};

struct SessionRun {
    std::vector<PRCurve> curves;
    /// Ranking of each iteration, for inspection and tests.
    std::vector<std::vector<std::string>> rankings;
};

/// Search, judge the top window against `relevant` (relevant -> positive,
/// otherwise negative), apply feedback, repeat. Curves are labelled with
/// the iteration index Q0, Q1, ...
SessionRun simulate_session(const IndexedCorpus& index, const QueryState& initial, const VideoSet& relevant,
                            const SessionOptions& options = {}, const std::string& query_id = {});

} // namespace ritual
