#include "cli.hpp"

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ritual/engine.hpp"
#include "ritual/error.hpp"
#include "ritual/evaluation.hpp"
#include "ritual/generator.hpp"
#include "ritual/numbers.hpp"
#include "ritual/service.hpp"

namespace ritual::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EngineFlags {
    std::string corpus;
    std::string contexts;
    std::string shots;
    std::string ontology;
    std::string markers;
    std::string synonyms;
    std::string stopwords_ar;
    std::string stopwords_en;
    std::string index_cache;
    std::string weights = "precomputed";
    double attenuation = Ontology::kDefaultAttenuation;

    void add_to(CLI::App& app, bool corpus_required = true) {
        auto* c = app.add_option("--corpus", corpus, "Concept description XML (concepts/concept/video)")
                      ->envname("RITUAL_CORPUS");
        if (corpus_required) c->required();
        app.add_option("--contexts", contexts, "Context description XML (contextes/Contexte/concept)")
            ->envname("RITUAL_CONTEXTS");
        app.add_option("--shots", shots, "Concept shot listing XML (concept/videoFeatureExtractionFeatureResult/item)")
            ->envname("RITUAL_SHOTS");
        app.add_option("--ontology", ontology, "Ontology XML; defaults to the contexts file")
            ->envname("RITUAL_ONTOLOGY");
        app.add_option("--markers", markers, "fNum<TAB>concept_id map for the shot listing")->envname("RITUAL_MARKERS");
        app.add_option("--synonyms", synonyms, "term<TAB>concept_id synonym file")->envname("RITUAL_SYNONYMS");
        app.add_option("--stopwords-ar", stopwords_ar, "Extra Arabic stop words, one per line");
        app.add_option("--stopwords-en", stopwords_en, "Extra English stop words, one per line");
        app.add_option("--index", index_cache, "Index cache file, used when it matches the corpus files")
            ->envname("RITUAL_INDEX");
        app.add_option("--weights", weights, "Weight source: precomputed | recompute")
            ->check(CLI::IsMember({"precomputed", "recompute"}))
            ->envname("RITUAL_WEIGHTS");
        app.add_option("--attenuation", attenuation, "Ontology expansion attenuation per level")
            ->check(CLI::Range(0.0, 1.0));
    }

    EngineConfig config() const {
        EngineConfig cfg;
        auto check = [](const std::string& p) -> std::optional<std::filesystem::path> {
            if (p.empty()) return std::nullopt;
            if (!std::filesystem::is_regular_file(p)) throw IoError("no such file: " + p);
            return std::filesystem::path(p);
        };
        cfg.concepts = *check(corpus);
        cfg.contexts = check(contexts);
        cfg.shots = check(shots);
        cfg.ontology = check(ontology);
        cfg.markers = check(markers);
        cfg.synonyms = check(synonyms);
        cfg.stopwords_ar = check(stopwords_ar);
        cfg.stopwords_en = check(stopwords_en);
        if (!index_cache.empty()) cfg.index_cache = index_cache;
        cfg.weight_source = parse_weight_source(weights);
        cfg.attenuation = attenuation;
        return cfg;
    }
};

std::string fmt_score(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(6) << v;
    return s.str();
}

void print_results(const Engine& engine, const std::vector<RankedResult>& results, bool pretty, std::ostream& out) {
    if (pretty) {
        out << std::left << std::setw(6) << "rank" << std::setw(10) << "score" << std::setw(12) << "video"
            << "name\n";
        for (const auto& r : results) {
            const VideoDoc* v = engine.corpus().find_video(r.video_num);
            out << std::left << std::setw(6) << r.rank << std::setw(10) << fmt_score(r.score) << std::setw(12)
                << r.video_num << (v ? v->name : "") << "  [" << (v ? v->shot_repres : "") << "]\n";
        }
        return;
    }
    out << "rank\tscore\tvideo_num\tname\tshot_repres\n";
    for (const auto& r : results) {
        const VideoDoc* v = engine.corpus().find_video(r.video_num);
        out << r.rank << '\t' << fmt_score(r.score) << '\t' << r.video_num << '\t' << (v ? v->name : "") << '\t'
            << (v ? v->shot_repres : "") << '\n';
    }
}

std::set<ConceptId> choose(const Engine& engine, const std::string& query, const std::vector<int>& explicit_ids,
                           std::ostream& err) {
    if (!explicit_ids.empty()) return {explicit_ids.begin(), explicit_ids.end()};
    std::set<ConceptId> chosen;
    for (const auto& m : engine.suggest(query)) chosen.insert(m.concept_id);
    if (chosen.empty()) err << "no concept matches the query; browse the ontology or pass --concepts\n";
    return chosen;
}

int cmd_index(const EngineFlags& flags, const std::string& out_path, std::ostream& out) {
    EngineConfig cfg = flags.config();
    cfg.index_cache = out_path;
    cfg.write_cache = true;
    std::filesystem::remove(out_path);
    auto engine = Engine::load(cfg);
    std::size_t postings = 0;
    for (const auto& [_, list] : engine->index().inverted()) postings += list.size();
    out << "videos\t" << engine->index().size() << "\n"
        << "concepts\t" << engine->corpus().concepts().size() << "\n"
        << "contexts\t" << engine->corpus().contexts().size() << "\n"
        << "postings\t" << postings << "\n"
        << "weights\t" << to_string(engine->index().weight_source()) << "\n"
        << "cache\t" << out_path << "\n";
    return kOk;
}

struct QueryFlags {
    std::string query;
    std::string lang = "ar";
    std::size_t k = kDefaultK;
    double alpha = kDefaultAlpha;
    int expand = 0;
    std::vector<int> concepts;
    std::optional<int> context;

    void add_to(CLI::App& app) {
        app.add_option("--query,-q", query, "Query text (Arabic or English)");
        app.add_option("--lang", lang, "Label language for display: ar | en")
            ->check(CLI::IsMember({"ar", "en"}))
            ->envname("RITUAL_LANG");
        app.add_option("--k", k, "Number of results")->check(CLI::PositiveNumber)->envname("RITUAL_K");
        app.add_option("--alpha", alpha, "Relevance feedback step")->check(CLI::NonNegativeNumber)->envname("RITUAL_ALPHA");
        app.add_option("--expand", expand, "Ontology expansion depth added to the query (0 = none)")
            ->check(CLI::NonNegativeNumber);
        app.add_option("--concepts", concepts, "Concept ids to search for instead of the matched candidates");
        app.add_option("--context", context, "Restrict to videos with a concept in this context");
    }
};

int cmd_search(const EngineFlags& flags, const QueryFlags& q, bool pretty, std::ostream& out, std::ostream& err) {
    if (q.query.find_first_not_of(" \t\r\n") == std::string::npos) throw UsageError("--query must not be empty");
    auto engine = Engine::load(flags.config());
    auto chosen = choose(*engine, q.query, q.concepts, err);
    auto state = engine->make_query(q.query, chosen, q.expand, q.alpha);
    auto results = search(engine->index(), state, {q.k, q.context});
    print_results(*engine, results, pretty, out);
    return kOk;
}

int cmd_session(const EngineFlags& flags, QueryFlags q, std::istream& in, std::ostream& out) {
    auto engine = Engine::load(flags.config());
    std::string line;
    if (q.query.empty()) {
        out << "query> " << std::flush;
        if (!std::getline(in, q.query)) return kOk;
    }
    if (q.query.find_first_not_of(" \t\r\n") == std::string::npos) throw UsageError("query must not be empty");

    auto candidates = engine->suggest(q.query);
    if (candidates.empty()) {
        out << "no matching concepts; contexts:\n";
        for (const auto& [id, ctx] : engine->corpus().contexts()) out << "  context:" << id << '\t' << ctx.name << '\n';
    }
    for (const auto& m : candidates) {
        out << "  " << m.concept_id << '\t' << fmt_score(m.score) << '\t'
            << engine->corpus().find_concept(m.concept_id)->label(q.lang) << '\n';
    }
    std::set<ConceptId> chosen(q.concepts.begin(), q.concepts.end());
    if (chosen.empty()) {
        out << "select concept ids (blank = all candidates)> " << std::flush;
        if (!std::getline(in, line)) return kOk;
        std::istringstream ids(line);
        for (int id; ids >> id;) chosen.insert(id);
        if (chosen.empty()) {
            for (const auto& m : candidates) chosen.insert(m.concept_id);
        }
    }
    if (chosen.empty()) throw UsageError("no concepts selected");

    auto state = engine->make_query(q.query, chosen, q.expand, q.alpha);
    auto results = search(engine->index(), state, {q.k, q.context});
    for (;;) {
        out << "Q" << state.iteration << '\n';
        print_results(*engine, results, false, out);
        out << "judge (+video -video, blank = iterate, q = quit)> " << std::flush;
        if (!std::getline(in, line) || line == "q" || line == "quit") break;
        JudgmentSet judgments;
        std::istringstream toks(line);
        for (std::string tok; toks >> tok;) {
            if (tok.size() < 2 || (tok[0] != '+' && tok[0] != '-')) {
                out << "ignored '" << tok << "'\n";
                continue;
            }
            (tok[0] == '+' ? judgments.positives : judgments.negatives).insert(tok.substr(1));
        }
        try {
            state = feedback_update(state, judgments, presented_window(results), engine->index());
        } catch (const ValidationError& e) {
            out << e.what() << '\n';
            continue;
        }
        results = search(engine->index(), state, {q.k, q.context});
    }
    return kOk;
}

struct EvalFlags {
    std::string qrels;
    std::string queries;
    std::string out_dir = ".";
    int iterations = 3;
    std::size_t window = kJudgeWindow;
};

int cmd_eval(const EngineFlags& flags, const QueryFlags& q, const EvalFlags& e, std::ostream& out, std::ostream& err) {
    auto engine = Engine::load(flags.config());
    Qrels qrels = parse_qrels(read_file(e.qrels));
    auto queries = parse_queries(read_file(e.queries));
    std::filesystem::create_directories(e.out_dir);

    out << "query\titeration\tP@10\tP@30\tR@30\n";
    for (const auto& [qid, text] : queries) {
        auto rel = qrels.find(qid);
        if (rel == qrels.end()) throw EvaluationError("query " + qid + " has no qrels");
        auto chosen = choose(*engine, text, q.concepts, err);
        auto state = engine->make_query(text, chosen, q.expand, q.alpha);
        SessionOptions opts;
        opts.iterations = e.iterations;
        opts.judge_window = e.window;
        opts.depth = q.k;
        opts.context = q.context;
        auto run = simulate_session(engine->index(), state, rel->second, opts, qid);
        for (std::size_t i = 0; i < run.curves.size(); ++i) {
            auto path = std::filesystem::path(e.out_dir) / (qid + "_Q" + std::to_string(i) + ".csv");
            std::ofstream f(path);
            write_curve_csv(run.curves[i], f);
            if (!f) throw IoError("cannot write " + path.string());
            const auto& ranking = run.rankings[i];
            auto p10 = precision_recall(ranking, rel->second, 10);
            auto p30 = precision_recall(ranking, rel->second, 30);
            out << qid << "\tQ" << i << '\t' << fmt_score(p10.precision) << '\t' << fmt_score(p30.precision) << '\t'
                << fmt_score(p30.recall) << '\n';
        }
    }
    return kOk;
}

std::function<void()> g_stop_server;

void on_signal(int) {
    if (g_stop_server) g_stop_server();
}

} // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Concept-based bilingual video metadata search", "ritual-search"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    EngineFlags engine_flags;
    QueryFlags query_flags;
    bool pretty = false;

    auto* index_cmd = app.add_subcommand("index", "Parse the corpus, build the index and write the cache file");
    engine_flags.add_to(*index_cmd);
    std::string index_out;
    index_cmd->add_option("--out", index_out, "Index cache file to write")->required()->envname("RITUAL_OUT");

    auto* search_cmd = app.add_subcommand("search", "One-shot query: ranked results as TAB-separated rows");
    engine_flags.add_to(*search_cmd);
    query_flags.add_to(*search_cmd);
    search_cmd->add_flag("--pretty", pretty, "Aligned columns instead of TAB separators");

    auto* session_cmd = app.add_subcommand("session", "Interactive loop: pick concepts, judge results, iterate");
    engine_flags.add_to(*session_cmd);
    query_flags.add_to(*session_cmd);

    auto* eval_cmd = app.add_subcommand("eval", "Simulated feedback sessions; writes one CSV curve per query and iteration");
    engine_flags.add_to(*eval_cmd);
    query_flags.add_to(*eval_cmd);
    EvalFlags eval_flags;
    eval_cmd->add_option("--qrels", eval_flags.qrels, "query_id<TAB>video_num relevance file")->required();
    eval_cmd->add_option("--queries", eval_flags.queries, "query_id<TAB>text query file")->required();
    eval_cmd->add_option("--iterations", eval_flags.iterations, "Iterations Q0..Q(n-1)")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--window", eval_flags.window, "Judged window per iteration")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--out", eval_flags.out_dir, "Directory for <query>_Q<i>.csv curves")->envname("RITUAL_OUT");

    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic corpus with planted relevance");
    GeneratorOptions gen;
    std::string gen_out;
    gen_cmd->add_option("--n-videos", gen.n_videos, "Number of videos")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--n-concepts", gen.n_concepts, "Number of concepts")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--n-contexts", gen.n_contexts, "Number of contexts")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--queries", gen.n_queries, "Number of planted queries");
    gen_cmd->add_option("--seed", gen.seed, "Random seed")->envname("RITUAL_SEED");
    gen_cmd->add_option("--out", gen_out, "Output directory")->required()->envname("RITUAL_OUT");

    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service in the foreground");
    engine_flags.add_to(*serve_cmd, false);
    std::string config_file;
    std::string host;
    int port = -1;
    std::string ui_dir;
    std::optional<double> serve_alpha;
    std::optional<std::size_t> serve_k;
    serve_cmd->add_option("--config", config_file, "JSON service config file")->envname("RITUAL_CONFIG");
    serve_cmd->add_option("--host", host, "Bind address");
    serve_cmd->add_option("--port", port, "Port (0 = any free port)");
    serve_cmd->add_option("--alpha", serve_alpha, "Relevance feedback step");
    serve_cmd->add_option("--k", serve_k, "Default number of results");
    serve_cmd->add_option("--ui", ui_dir, "Static web client directory served under /ui");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*index_cmd) return cmd_index(engine_flags, index_out, out);
        if (*search_cmd) return cmd_search(engine_flags, query_flags, pretty, out, err);
        if (*session_cmd) return cmd_session(engine_flags, query_flags, in, out);
        if (*eval_cmd) return cmd_eval(engine_flags, query_flags, eval_flags, out, err);
        if (*gen_cmd) {
            auto paths = write_generated(generate_corpus(gen), gen_out);
            out << "concepts\t" << paths.concepts.string() << "\nshots\t" << paths.shots.string() << "\ncontexts\t"
                << paths.contexts.string() << "\nontology\t" << paths.ontology.string() << "\nqrels\t"
                << paths.qrels.string() << "\nqueries\t" << paths.queries.string() << '\n';
            return kOk;
        }
        if (*serve_cmd) {
            ServiceConfig cfg = load_service_config(
                config_file.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_file),
                [](const char* name) { return std::getenv(name); });
            if (!engine_flags.corpus.empty()) cfg.engine = engine_flags.config();
            if (cfg.engine.concepts.empty()) throw UsageError("serve needs --corpus or a config file naming it");
            if (!host.empty()) cfg.host = host;
            if (port >= 0) cfg.port = port;
            if (serve_alpha) cfg.settings.alpha = *serve_alpha;
            if (serve_k) cfg.settings.k = *serve_k;
            if (!ui_dir.empty()) cfg.ui_dir = ui_dir;

            Service service(Engine::load(cfg.engine), cfg.settings);
            HttpServer server(service, cfg.ui_dir);
            int bound = server.bind(cfg.host, cfg.port);
            if (bound < 0) throw IoError("cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
            out << "listening on http://" << cfg.host << ":" << bound << std::endl;
            g_stop_server = [&server] { server.stop(); };
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            server.listen();
            g_stop_server = nullptr;
            return kOk;
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const Error& e) {
        err << e.kind() << ": " << e.what() << '\n';
        return kData;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIo;
    }
    return kUsage;
}

} // namespace ritual::cli
