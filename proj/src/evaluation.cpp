#include "ritual/evaluation.hpp"

#include <ostream>
#include <sstream>

#include "ritual/error.hpp"
#include "ritual/numbers.hpp"

namespace ritual {

namespace {

template <typename F>
void for_each_tsv_line(std::string_view text, std::string_view what, F&& f) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
            throw ValidationError(std::string(what) + " line " + std::to_string(lineno) +
                                  ": expected two TAB-separated fields");
        }
        f(line.substr(0, tab), line.substr(tab + 1));
    }
}

} // namespace

Qrels parse_qrels(std::string_view text) {
    Qrels out;
    for_each_tsv_line(text, "qrels", [&](std::string q, std::string v) { out[q].insert(std::move(v)); });
    return out;
}

std::string serialize_qrels(const Qrels& qrels) {
    std::string out;
    for (const auto& [q, videos] : qrels) {
        for (const auto& v : videos) out += q + "\t" + v + "\n";
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> parse_queries(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> out;
    for_each_tsv_line(text, "queries", [&](std::string q, std::string t) { out.emplace_back(std::move(q), std::move(t)); });
    return out;
}

PrecisionRecall precision_recall(std::span<const std::string> ranking, const VideoSet& relevant,
                                 std::size_t cutoff) {
    if (relevant.empty()) throw EvaluationError("no relevant videos for this query");
    if (cutoff == 0) throw EvaluationError("cutoff must be at least 1");
    std::size_t returned = std::min(cutoff, ranking.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < returned; ++i) hits += relevant.count(ranking[i]);
    PrecisionRecall pr;
    pr.precision = returned == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(returned);
    pr.recall = static_cast<double>(hits) / static_cast<double>(relevant.size());
    return pr;
}

PRCurve curve(std::span<const std::string> ranking, const VideoSet& relevant, std::size_t k,
              std::string query_id, int iteration) {
    if (relevant.empty()) throw EvaluationError("no relevant videos for this query");
    PRCurve c{std::move(query_id), iteration, {}};
    std::size_t n = std::min(k, ranking.size());
    for (std::size_t rank = 1; rank <= n; ++rank) {
        auto pr = precision_recall(ranking, relevant, rank);
        c.points.push_back({rank, pr.recall, pr.precision});
    }
    return c;
}

void write_curve_csv(const PRCurve& c, std::ostream& out) {
    out << "rank,recall,precision\n";
    for (const auto& p : c.points) {
        out << p.rank << ',' << format_decimal(p.recall) << ',' << format_decimal(p.precision) << '\n';
    }
}

SessionRun simulate_session(const IndexedCorpus& index, const QueryState& initial, const VideoSet& relevant,
                            const SessionOptions& options, const std::string& query_id) {
    if (options.iterations < 1) throw EvaluationError("iterations must be at least 1");
    SearchOptions search_opts;
    search_opts.k = std::max(options.depth, options.judge_window);
    search_opts.context = options.context;

    SessionRun run;
    QueryState state = initial;
    for (int i = 0; i < options.iterations; ++i) {
        auto results = search(index, state, search_opts);
        std::vector<std::string> ranking;
        ranking.reserve(results.size());
        for (const auto& r : results) ranking.push_back(r.video_num);
        run.curves.push_back(curve(ranking, relevant, options.depth, query_id, i));
        run.rankings.push_back(ranking);

        if (i + 1 == options.iterations) break;
        auto window = presented_window(results, options.judge_window);
        JudgmentSet judgments;
        for (const auto& v : window) (relevant.count(v) ? judgments.positives : judgments.negatives).insert(v);
        state = feedback_update(state, judgments, window, index);
    }
    return run;
}

} // namespace ritual
