#include "ritual/service.hpp"

#include <cstdlib>
#include <random>

#include <httplib.h>
#include <json.hpp>

#include "ritual/error.hpp"
#include "ritual/numbers.hpp"

namespace ritual {

using nlohmann::json;

namespace {

struct ApiError {
    int status;
    std::string code;
    std::string message;
    json detail = nullptr;
};

std::string dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

HttpResponse error_response(const ApiError& e) {
    return {e.status, dump({{"code", e.code}, {"message", e.message}, {"detail", e.detail}})};
}

json parse_body(std::string_view body) {
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ApiError{400, "malformed_body", "request body must be a JSON object"};
    }
    return j;
}

template <typename T>
std::optional<T> optional_field(const json& body, const char* key) {
    auto it = body.find(key);
    if (it == body.end() || it->is_null()) return std::nullopt;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ApiError{400, "malformed_body", std::string("field '") + key + "' has the wrong type"};
    }
}

template <typename T>
T required_field(const json& body, const char* key) {
    auto v = optional_field<T>(body, key);
    if (!v) throw ApiError{400, "malformed_body", std::string("missing field '") + key + "'"};
    return *v;
}

json labels_json(const std::map<std::string, std::string>& labels) {
    json j = json::object();
    for (const auto& [lang, text] : labels) j[lang] = text;
    return j;
}

json node_json(const Ontology& ontology, NodeRef ref) {
    json j{{"node", ref.str()}, {"kind", ref.kind == NodeKind::context ? "context" : "concept"}};
    j["labels"] = ontology.contains(ref) ? labels_json(ontology.node(ref).labels) : json::object();
    return j;
}

json results_json(const Engine& engine, const std::vector<RankedResult>& results) {
    json arr = json::array();
    for (const auto& r : results) {
        const VideoDoc* v = engine.corpus().find_video(r.video_num);
        json matched = json::array();
        for (const auto& [cid, contribution] : r.matched_concepts) {
            matched.push_back({{"concept_id", cid}, {"contribution", contribution}});
        }
        arr.push_back({{"rank", r.rank},
                       {"video_num", r.video_num},
                       {"name", v ? v->name : ""},
                       {"shot_repres", v ? v->shot_repres : ""},
                       {"score", r.score},
                       {"matched_concepts", matched}});
    }
    return arr;
}

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

struct Service::Session {
    std::mutex mutex;
    QueryState state;
    bool searched = false;
    std::size_t k = kDefaultK;
    std::optional<ContextId> context;
    std::vector<std::string> last_presented;
    std::chrono::steady_clock::time_point created;
    std::chrono::steady_clock::time_point last_used;
};

Service::Service(std::shared_ptr<const Engine> engine, ServiceSettings settings, Clock clock)
    : engine_(std::move(engine)), settings_(settings), clock_(std::move(clock)) {
    if (settings_.session_seed == 0) settings_.session_seed = std::random_device{}() | 1ULL;
}

void Service::swap_engine(std::shared_ptr<const Engine> engine) {
    std::lock_guard lock(engine_mutex_);
    engine_ = std::move(engine);
}

std::shared_ptr<const Engine> Service::engine() const {
    std::lock_guard lock(engine_mutex_);
    return engine_;
}

std::size_t Service::session_count() const {
    std::lock_guard lock(sessions_mutex_);
    return sessions_.size();
}

std::string Service::next_session_id() {
    static const char hex[] = "0123456789abcdef";
    std::uint64_t v = splitmix(settings_.session_seed ^ splitmix(++session_counter_));
    std::string id(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) id[static_cast<std::size_t>(i)] = hex[v & 0xF];
    return id;
}

void Service::purge_expired() {
    auto now = clock_();
    std::erase_if(sessions_, [&](const auto& kv) { return now - kv.second->last_used > settings_.session_timeout; });
}

std::shared_ptr<Service::Session> Service::find_session(const std::string& id) {
    std::lock_guard lock(sessions_mutex_);
    purge_expired();
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ApiError{404, "unknown_session", "session not found or expired", id};
    it->second->last_used = clock_();
    return it->second;
}

HttpResponse Service::handle(std::string_view method, std::string_view path, std::string_view body) {
    try {
        if (body.size() > settings_.max_body_bytes) {
            throw ApiError{413, "body_too_large", "request body exceeds " + std::to_string(settings_.max_body_bytes) + " bytes"};
        }
        auto strip = [&](std::string_view prefix) -> std::optional<std::string_view> {
            if (path.substr(0, prefix.size()) != prefix || path.size() == prefix.size()) return std::nullopt;
            return path.substr(prefix.size());
        };
        if (path == "/api/query" || path == "/api/search" || path == "/api/feedback") {
            if (method != "POST") throw ApiError{405, "method_not_allowed", "use POST"};
            if (path == "/api/query") return post_query(body);
            if (path == "/api/search") return post_search(body);
            return post_feedback(body);
        }
        if (method != "GET") throw ApiError{405, "method_not_allowed", "use GET"};
        if (path == "/api/contexts") return get_contexts();
        if (auto node = strip("/api/ontology/")) return get_ontology(*node);
        if (auto video = strip("/api/videos/")) return get_video(*video);
        throw ApiError{404, "not_found", "no such endpoint", std::string(path)};
    } catch (const ApiError& e) {
        return error_response(e);
    } catch (const Error& e) {
        return error_response({500, e.kind(), e.what()});
    } catch (const std::exception& e) {
        return error_response({500, "internal_error", e.what()});
    }
}

HttpResponse Service::post_query(std::string_view body) {
    json req = parse_body(body);
    auto text = required_field<std::string>(req, "text");
    auto lang = optional_field<std::string>(req, "lang").value_or("ar");
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw ApiError{400, "empty_query", "query text is empty"};
    }
    auto engine = this->engine();

    auto candidates = engine->suggest(text);
    json cand = json::array();
    std::set<NodeRef> chosen;
    for (const auto& m : candidates) {
        const Concept* c = engine->corpus().find_concept(m.concept_id);
        cand.push_back({{"concept_id", m.concept_id},
                        {"score", m.score},
                        {"label", c ? c->label(lang) : ""},
                        {"labels", c ? labels_json(c->labels) : json::object()}});
        chosen.insert(NodeRef::concept_of(m.concept_id));
    }

    json suggestions = json::array();
    std::set<NodeRef> known;
    for (NodeRef n : chosen) {
        if (engine->ontology().contains(n)) known.insert(n);
    }
    if (!known.empty() && settings_.expand_depth > 0) {
        std::vector<std::pair<ConceptId, double>> extra;
        for (const auto& [cid, w] : engine->ontology().expand(known, settings_.expand_depth)) {
            if (!chosen.count(NodeRef::concept_of(cid))) extra.emplace_back(cid, w);
        }
        std::stable_sort(extra.begin(), extra.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        for (const auto& [cid, w] : extra) {
            const Concept* c = engine->corpus().find_concept(cid);
            suggestions.push_back({{"concept_id", cid}, {"weight", w}, {"label", c ? c->label(lang) : ""}});
        }
    }

    auto session = std::make_shared<Session>();
    session->state.raw_text = text;
    session->state.alpha = settings_.alpha;
    session->k = settings_.k;
    session->created = session->last_used = clock_();
    std::string id;
    {
        std::lock_guard lock(sessions_mutex_);
        purge_expired();
        id = next_session_id();
        sessions_[id] = session;
    }

    json res{{"session_id", id}, {"candidates", cand}, {"suggestions", suggestions}};
    res["hint"] = candidates.empty() ? json("browse_ontology") : json(nullptr);
    return {200, dump(res)};
}

HttpResponse Service::post_search(std::string_view body) {
    json req = parse_body(body);
    auto session = find_session(required_field<std::string>(req, "session_id"));
    auto concepts = required_field<std::vector<ConceptId>>(req, "concepts");
    auto context = optional_field<ContextId>(req, "context");
    auto k = optional_field<long long>(req, "k").value_or(static_cast<long long>(settings_.k));
    bool expand = optional_field<bool>(req, "expand").value_or(settings_.auto_expand);
    if (k < 1) throw ApiError{400, "bad_k", "k must be at least 1"};
    if (concepts.empty()) throw ApiError{422, "no_concepts", "choose at least one concept"};

    auto engine = this->engine();
    json unknown = json::array();
    for (ConceptId id : concepts) {
        if (!engine->corpus().find_concept(id)) unknown.push_back(id);
    }
    if (!unknown.empty()) throw ApiError{422, "unknown_concept", "unknown concept id(s)", unknown};
    if (context && !engine->corpus().find_context(*context)) {
        throw ApiError{422, "unknown_context", "unknown context id", *context};
    }

    std::lock_guard lock(session->mutex);
    std::set<ConceptId> chosen(concepts.begin(), concepts.end());
    session->state = engine->make_query(session->state.raw_text, chosen, expand ? settings_.expand_depth : 0,
                                        settings_.alpha);
    session->k = static_cast<std::size_t>(k);
    session->context = context;
    auto results = search(engine->index(), session->state, {session->k, session->context});
    session->last_presented = presented_window(results);
    session->searched = true;

    json res{{"session_id", req["session_id"]},
             {"iteration", session->state.iteration},
             {"results", results_json(*engine, results)}};
    return {200, dump(res)};
}

HttpResponse Service::post_feedback(std::string_view body) {
    json req = parse_body(body);
    auto session = find_session(required_field<std::string>(req, "session_id"));
    auto positives = optional_field<std::vector<std::string>>(req, "positives").value_or(std::vector<std::string>{});
    auto negatives = optional_field<std::vector<std::string>>(req, "negatives").value_or(std::vector<std::string>{});
    auto engine = this->engine();

    std::lock_guard lock(session->mutex);
    if (!session->searched) throw ApiError{409, "no_search", "run /api/search before sending feedback"};

    JudgmentSet judgments;
    judgments.positives.insert(positives.begin(), positives.end());
    judgments.negatives.insert(negatives.begin(), negatives.end());
    try {
        session->state = feedback_update(session->state, judgments, session->last_presented, engine->index());
    } catch (const ValidationError& e) {
        throw ApiError{422, "invalid_judgments", e.what()};
    } catch (const LookupError& e) {
        throw ApiError{422, "invalid_judgments", e.what()};
    }
    auto results = search(engine->index(), session->state, {session->k, session->context});
    session->last_presented = presented_window(results);

    json res{{"session_id", req["session_id"]},
             {"iteration", session->state.iteration},
             {"results", results_json(*engine, results)}};
    return {200, dump(res)};
}

HttpResponse Service::get_ontology(std::string_view node) {
    auto engine = this->engine();
    const Ontology& onto = engine->ontology();
    if (node == "root") {
        json children = json::array();
        for (NodeRef ctx : onto.contexts()) children.push_back(node_json(onto, ctx));
        return {200, dump({{"node", "root"}, {"kind", "root"}, {"labels", json::object()},
                           {"parents", json::array()}, {"children", children}})};
    }
    NodeRef ref;
    try {
        ref = NodeRef::parse(node);
        if (!onto.contains(ref)) throw LookupError("unknown node");
    } catch (const LookupError&) {
        throw ApiError{404, "unknown_node", "no such ontology node", std::string(node)};
    }
    Neighbors nb = onto.neighbors(ref);
    json res = node_json(onto, ref);
    res["parents"] = json::array();
    for (NodeRef p : nb.parents) res["parents"].push_back(node_json(onto, p));
    res["children"] = json::array();
    for (NodeRef c : nb.children) {
        json child = node_json(onto, c);
        child["weight"] = onto.node(ref).children.at(c);
        res["children"].push_back(std::move(child));
    }
    return {200, dump(res)};
}

HttpResponse Service::get_contexts() {
    auto engine = this->engine();
    json arr = json::array();
    for (const auto& [id, ctx] : engine->corpus().contexts()) {
        json members = json::array();
        for (const auto& m : ctx.members) {
            members.push_back({{"concept_id", m.concept_id}, {"concept_name", m.concept_name}, {"weight", m.weight}});
        }
        arr.push_back({{"context_id", id}, {"name", ctx.name}, {"nbr_concept", ctx.nbr_concept}, {"members", members}});
    }
    return {200, dump({{"contexts", arr}})};
}

HttpResponse Service::get_video(std::string_view video_num) {
    auto engine = this->engine();
    const VideoDoc* v = engine->corpus().find_video(video_num);
    auto doc = engine->index().find(video_num);
    if (v == nullptr || !doc) throw ApiError{404, "unknown_video", "no such video", std::string(video_num)};
    json concepts = json::array();
    for (const auto& [cid, w] : engine->index().doc_vector(*doc)) {
        const Concept* c = engine->corpus().find_concept(cid);
        concepts.push_back({{"concept_id", cid}, {"weight", w}, {"labels", c ? labels_json(c->labels) : json::object()}});
    }
    return {200, dump({{"video_num", v->video_num},
                       {"name", v->name},
                       {"number_shots", v->number_shots},
                       {"shot_repres", v->shot_repres},
                       {"concepts", concepts}})};
}

ServiceConfig load_service_config(const std::optional<std::filesystem::path>& file,
                                  const std::function<const char*(const char*)>& getenv) {
    ServiceConfig cfg;
    auto path_or = [](const json& j, const char* key, std::optional<std::filesystem::path>& slot) {
        if (auto it = j.find(key); it != j.end() && it->is_string()) slot = it->get<std::string>();
    };
    if (file) {
        json j = json::parse(read_file(*file), nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw ConfigError(file->string() + " is not a JSON object");
        try {
            cfg.host = j.value("host", cfg.host);
            cfg.port = j.value("port", cfg.port);
            if (j.contains("concepts")) cfg.engine.concepts = j["concepts"].get<std::string>();
            path_or(j, "contexts", cfg.engine.contexts);
            path_or(j, "shots", cfg.engine.shots);
            path_or(j, "ontology", cfg.engine.ontology);
            path_or(j, "markers", cfg.engine.markers);
            path_or(j, "synonyms", cfg.engine.synonyms);
            path_or(j, "stopwords_ar", cfg.engine.stopwords_ar);
            path_or(j, "stopwords_en", cfg.engine.stopwords_en);
            path_or(j, "index_cache", cfg.engine.index_cache);
            path_or(j, "ui_dir", cfg.ui_dir);
            if (j.contains("weight_source")) cfg.engine.weight_source = parse_weight_source(j["weight_source"].get<std::string>());
            cfg.engine.attenuation = j.value("attenuation", cfg.engine.attenuation);
            cfg.settings.alpha = j.value("alpha", cfg.settings.alpha);
            cfg.settings.k = j.value("k", cfg.settings.k);
            cfg.settings.session_timeout = std::chrono::seconds(
                j.value("session_timeout_seconds", static_cast<long long>(cfg.settings.session_timeout.count())));
            cfg.settings.max_body_bytes = j.value("max_body_bytes", cfg.settings.max_body_bytes);
            cfg.settings.expand_depth = j.value("expand_depth", cfg.settings.expand_depth);
            cfg.settings.auto_expand = j.value("auto_expand", cfg.settings.auto_expand);
            cfg.settings.session_seed = j.value("session_seed", cfg.settings.session_seed);
        } catch (const json::exception& e) {
            throw ConfigError(file->string() + ": " + e.what());
        }
    }

    auto env = [&](const char* name) -> std::optional<std::string> {
        const char* v = getenv(name);
        if (v == nullptr || *v == '\0') return std::nullopt;
        return std::string(v);
    };
    auto env_number = [&](const char* name) -> std::optional<double> {
        auto v = env(name);
        if (!v) return std::nullopt;
        auto d = parse_decimal(*v);
        if (!d) throw ConfigError(std::string(name) + " is not a number");
        return d;
    };
    if (auto v = env("RITUAL_HOST")) cfg.host = *v;
    if (auto v = env_number("RITUAL_PORT")) cfg.port = static_cast<int>(*v);
    if (auto v = env("RITUAL_CORPUS")) cfg.engine.concepts = *v;
    if (auto v = env("RITUAL_CONTEXTS")) cfg.engine.contexts = *v;
    if (auto v = env("RITUAL_SHOTS")) cfg.engine.shots = *v;
    if (auto v = env("RITUAL_ONTOLOGY")) cfg.engine.ontology = *v;
    if (auto v = env_number("RITUAL_ALPHA")) cfg.settings.alpha = *v;
    if (auto v = env_number("RITUAL_K")) cfg.settings.k = static_cast<std::size_t>(*v);
    if (auto v = env_number("RITUAL_SESSION_TIMEOUT")) cfg.settings.session_timeout = std::chrono::seconds(static_cast<long long>(*v));
    return cfg;
}

struct HttpServer::Impl {
    Service& service;
    httplib::Server server;
    explicit Impl(Service& s) : service(s) {}
};

HttpServer::HttpServer(Service& service, std::optional<std::filesystem::path> ui_dir)
    : impl_(std::make_unique<Impl>(service)) {
    auto& srv = impl_->server;
    srv.set_payload_max_length(service.settings().max_body_bytes);
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
        HttpResponse r = impl_->service.handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body, "application/json; charset=utf-8");
    };
    srv.Get("/api/.*", forward);
    srv.Post("/api/.*", forward);
    if (ui_dir) srv.set_mount_point("/ui", ui_dir->string());
    srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (!res.body.empty()) return;
        std::string code = res.status == 413 ? "body_too_large" : res.status == 404 ? "not_found" : "http_error";
        res.set_content(dump({{"code", code}, {"message", httplib::status_message(res.status)}, {"detail", nullptr}}),
                        "application/json; charset=utf-8");
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

} // namespace ritual
