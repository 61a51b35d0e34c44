#pragma once

// HTTP/JSON service for the interactive loop: concept suggestion, search,
// feedback, ontology browsing. `Service::handle` is transport-independent;
// `HttpServer` binds it to cpp-httplib.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ritual/engine.hpp"

namespace ritual {

struct ServiceSettings {
    double alpha = kDefaultAlpha;
    std::size_t k = kDefaultK;
    std::chrono::seconds session_timeout{30 * 60};
    std::size_t max_body_bytes = 1 << 20;
    /// Depth used for ontology suggestions on /api/query, and for expansion
    /// on /api/search when the request (or auto_expand) asks for it.
    int expand_depth = 1;
    bool auto_expand = false;
    /// Seeds session tokens. Fixed seeds give replayable transcripts.
    std::uint64_t session_seed = 0;
};

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    EngineConfig engine;
    ServiceSettings settings;
    std::optional<std::filesystem::path> ui_dir;
};

/// JSON config file (keys documented in docs/api.md), then RITUAL_*
/// environment overrides. `getenv` is injectable for tests.
ServiceConfig load_service_config(const std::optional<std::filesystem::path>& file,
                                  const std::function<const char*(const char*)>& getenv);

struct HttpResponse {
    int status = 200;
    std::string body;
};

class Service {
public:
    using Clock = std::function<std::chrono::steady_clock::time_point()>;

    explicit Service(std::shared_ptr<const Engine> engine, ServiceSettings settings = {},
                     Clock clock = [] { return std::chrono::steady_clock::now(); });

    /// Route one request. Never throws; errors become {code, message, detail}.
    HttpResponse handle(std::string_view method, std::string_view path, std::string_view body);

    /// Atomically replaces the engine; in-flight requests finish on the old one.
    void swap_engine(std::shared_ptr<const Engine> engine);
    std::shared_ptr<const Engine> engine() const;

    std::size_t session_count() const;
    const ServiceSettings& settings() const noexcept { return settings_; }

private:
    struct Session;

    HttpResponse post_query(std::string_view body);
    HttpResponse post_search(std::string_view body);
    HttpResponse post_feedback(std::string_view body);
    HttpResponse get_ontology(std::string_view node);
    HttpResponse get_contexts();
    HttpResponse get_video(std::string_view video_num);

    std::shared_ptr<Session> find_session(const std::string& id);
    std::string next_session_id();
    void purge_expired();

    mutable std::mutex engine_mutex_;
    std::shared_ptr<const Engine> engine_;
    ServiceSettings settings_;
    Clock clock_;

    mutable std::mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t session_counter_ = 0;
};

/// Blocking HTTP/1.1 front end.
class HttpServer {
public:
    HttpServer(Service& service, std::optional<std::filesystem::path> ui_dir = std::nullopt);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Port 0 picks a free port. Returns the bound port or -1.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    bool listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace ritual
