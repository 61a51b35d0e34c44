#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ritual/engine.hpp"
#include "ritual/error.hpp"
#include "ritual/evaluation.hpp"
#include "ritual/generator.hpp"
#include "ritual/retrieval.hpp"

namespace py = pybind11;
using namespace ritual;

namespace {

using Path = std::optional<std::filesystem::path>;

std::shared_ptr<const Engine> load_engine(const std::filesystem::path& concepts, Path contexts, Path shots,
                                          Path ontology, Path markers, Path synonyms, Path index_cache,
                                          const std::string& weights, double attenuation) {
    EngineConfig cfg;
    cfg.concepts = concepts;
    cfg.contexts = std::move(contexts);
    cfg.shots = std::move(shots);
    cfg.ontology = std::move(ontology);
    cfg.markers = std::move(markers);
    cfg.synonyms = std::move(synonyms);
    cfg.index_cache = std::move(index_cache);
    cfg.write_cache = cfg.index_cache.has_value();
    cfg.weight_source = parse_weight_source(weights);
    cfg.attenuation = attenuation;
    py::gil_scoped_release release;
    return Engine::load(cfg);
}

std::set<ConceptId> chosen_concepts(const Engine& engine, const std::string& text,
                                    const std::optional<std::vector<ConceptId>>& concepts) {
    if (concepts) return {concepts->begin(), concepts->end()};
    std::set<ConceptId> out;
    for (const auto& m : engine.suggest(text)) out.insert(m.concept_id);
    return out;
}

py::list results_to_py(const Engine& engine, const std::vector<RankedResult>& results) {
    py::list out;
    for (const auto& r : results) {
        const VideoDoc* v = engine.corpus().find_video(r.video_num);
        py::dict d;
        d["rank"] = r.rank;
        d["video_num"] = r.video_num;
        d["score"] = r.score;
        d["name"] = v ? v->name : std::string();
        d["shot_repres"] = v ? v->shot_repres : std::string();
        d["matched_concepts"] = r.matched_concepts;
        out.append(std::move(d));
    }
    return out;
}

/// Feedback session over one engine: holds the query state and the last
/// results shown.
class PySession {
public:
    PySession(std::shared_ptr<const Engine> engine, const std::string& text,
              const std::optional<std::vector<ConceptId>>& concepts, std::size_t k, std::optional<ContextId> context,
              int expand, double alpha)
        : engine_(std::move(engine)), options_{k, context} {
        state_ = engine_->make_query(text, chosen_concepts(*engine_, text, concepts), expand, alpha);
        results_ = search(engine_->index(), state_, options_);
    }

    py::list feedback(const std::vector<std::string>& positives, const std::vector<std::string>& negatives) {
        JudgmentSet j{{positives.begin(), positives.end()}, {negatives.begin(), negatives.end()}};
        state_ = feedback_update(state_, j, presented_window(results_), engine_->index());
        results_ = search(engine_->index(), state_, options_);
        return results();
    }

    py::list results() const { return results_to_py(*engine_, results_); }
    int iteration() const { return state_.iteration; }
    const SparseVector& query_vector() const { return state_.pq; }

private:
    std::shared_ptr<const Engine> engine_;
    SearchOptions options_;
    QueryState state_;
    std::vector<RankedResult> results_;
};

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Concept-based bilingual video search engine";

    auto base = py::register_exception<Error>(m, "RitualError", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<ResolutionError>(m, "ResolutionError", base.ptr());
    py::register_exception<LookupError>(m, "LookupError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<EvaluationError>(m, "EvaluationError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    m.attr("DEFAULT_ALPHA") = kDefaultAlpha;
    m.attr("DEFAULT_K") = kDefaultK;

    py::class_<Engine, std::shared_ptr<Engine>>(m, "Engine")
        .def_static(
            "load",
            [](const std::filesystem::path& concepts, Path contexts, Path shots, Path ontology, Path markers,
               Path synonyms, Path index_cache, const std::string& weights, double attenuation) {
                return std::const_pointer_cast<Engine>(load_engine(concepts, contexts, shots, ontology, markers,
                                                                   synonyms, index_cache, weights, attenuation));
            },
            py::arg("concepts"), py::arg("contexts") = py::none(), py::arg("shots") = py::none(),
            py::arg("ontology") = py::none(), py::arg("markers") = py::none(), py::arg("synonyms") = py::none(),
            py::arg("index_cache") = py::none(), py::arg("weights") = "precomputed",
            py::arg("attenuation") = Ontology::kDefaultAttenuation)
        .def_property_readonly("n_videos", [](const Engine& e) { return e.corpus().n_videos(); })
        .def_property_readonly("n_concepts", [](const Engine& e) { return e.corpus().concepts().size(); })
        .def_property_readonly("contexts",
                               [](const Engine& e) {
                                   std::map<ContextId, std::string> out;
                                   for (const auto& [id, c] : e.corpus().contexts()) out[id] = c.name;
                                   return out;
                               })
        .def(
            "label",
            [](const Engine& e, ConceptId id, const std::string& lang) {
                const Concept* c = e.corpus().find_concept(id);
                if (c == nullptr) throw LookupError("unknown concept " + std::to_string(id));
                return c->label(lang);
            },
            py::arg("concept_id"), py::arg("lang") = "ar")
        .def(
            "suggest",
            [](const Engine& e, const std::string& text) {
                std::vector<std::pair<ConceptId, double>> out;
                for (const auto& m : e.suggest(text)) out.emplace_back(m.concept_id, m.score);
                return out;
            },
            py::arg("text"))
        .def(
            "search",
            [](const Engine& e, const std::string& text, std::optional<std::vector<ConceptId>> concepts,
               std::size_t k, std::optional<ContextId> context, int expand) {
                auto state = e.make_query(text, chosen_concepts(e, text, concepts), expand);
                return results_to_py(e, search(e.index(), state, {k, context}));
            },
            py::arg("text"), py::arg("concepts") = py::none(), py::arg("k") = kDefaultK,
            py::arg("context") = py::none(), py::arg("expand") = 0)
        .def(
            "session",
            [](std::shared_ptr<Engine> e, const std::string& text, std::optional<std::vector<ConceptId>> concepts,
               std::size_t k, std::optional<ContextId> context, int expand, double alpha) {
                return PySession(std::move(e), text, concepts, k, context, expand, alpha);
            },
            py::arg("text"), py::arg("concepts") = py::none(), py::arg("k") = kDefaultK,
            py::arg("context") = py::none(), py::arg("expand") = 0, py::arg("alpha") = kDefaultAlpha)
        .def(
            "simulate",
            [](const Engine& e, const std::vector<ConceptId>& concepts, const std::vector<std::string>& relevant,
               int iterations, std::size_t window, double alpha) {
                auto state = initial_query("", {concepts.begin(), concepts.end()}, {}, alpha);
                SessionOptions opts;
                opts.iterations = iterations;
                opts.judge_window = window;
                auto run = simulate_session(e.index(), state, {relevant.begin(), relevant.end()}, opts);
                py::list curves;
                for (const auto& c : run.curves) {
                    py::list points;
                    for (const auto& p : c.points) points.append(py::make_tuple(p.rank, p.recall, p.precision));
                    curves.append(std::move(points));
                }
                return py::make_tuple(curves, run.rankings);
            },
            py::arg("concepts"), py::arg("relevant"), py::arg("iterations") = 3, py::arg("window") = kJudgeWindow,
            py::arg("alpha") = kDefaultAlpha,
            "Simulated judging session; returns (curves, rankings), one per iteration.");

    py::class_<PySession>(m, "Session")
        .def_property_readonly("iteration", &PySession::iteration)
        .def_property_readonly("query_vector", &PySession::query_vector)
        .def("results", &PySession::results)
        .def("feedback", &PySession::feedback, py::arg("positives") = std::vector<std::string>{},
             py::arg("negatives") = std::vector<std::string>{});

    m.def(
        "precision_recall",
        [](const std::vector<std::string>& ranking, const std::vector<std::string>& relevant, std::size_t cutoff) {
            auto pr = precision_recall(ranking, VideoSet(relevant.begin(), relevant.end()), cutoff);
            return py::make_tuple(pr.precision, pr.recall);
        },
        py::arg("ranking"), py::arg("relevant"), py::arg("cutoff"));

    m.def(
        "generate_corpus",
        [](const std::filesystem::path& out_dir, std::size_t n_videos, std::size_t n_concepts, std::size_t n_contexts,
           std::size_t queries, std::uint64_t seed) {
            GeneratorOptions opts;
            opts.n_videos = n_videos;
            opts.n_concepts = n_concepts;
            opts.n_contexts = n_contexts;
            opts.n_queries = queries;
            opts.seed = seed;
            auto paths = write_generated(generate_corpus(opts), out_dir);
            return std::map<std::string, std::filesystem::path>{
                {"concepts", paths.concepts}, {"shots", paths.shots},     {"contexts", paths.contexts},
                {"ontology", paths.ontology}, {"qrels", paths.qrels}, {"queries", paths.queries}};
        },
        py::arg("out_dir"), py::arg("n_videos") = 1000, py::arg("n_concepts") = 130, py::arg("n_contexts") = 12,
        py::arg("queries") = 5, py::arg("seed") = 1);
}
