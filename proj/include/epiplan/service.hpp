#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "epiplan/config.hpp"
#include "epiplan/types.hpp"

namespace epiplan {

// Error surfaced to HTTP clients as {code, message, detail}.
struct ServiceError : std::runtime_error {
    ServiceError(int status, std::string code, const std::string& message, nlohmann::json detail = {})
        : std::runtime_error(message), status(status), code(std::move(code)), detail(std::move(detail)) {}
    int status;
    std::string code;
    nlohmann::json detail;

    nlohmann::json body() const;
};

struct Session {
    std::string id;
    Config config;
    std::uint64_t seed = 0;
    Dataset data;  // observations through current_day, actions before it
    Day current_day = 1;
    std::map<std::string, int> commits;  // region -> action for the open decision point
    nlohmann::json posterior;
    bool synthetic = false;
    GsirParams truth;
    std::vector<RegionState> truth_states;  // per region, on current_day
    std::map<std::string, std::string> frontiers;  // "<day>/<region>" -> serialized body

    bool at_decision_point() const;
    nlohmann::json summary() const;
    nlohmann::json snapshot() const;
    static Session from_snapshot(const nlohmann::json& j);
};

struct FrontierResponse {
    int status = 200;  // 200 ready, 202 running
    std::string body;
    std::string etag;
};

// Session logic behind the REST routes. Each session is guarded by its own
// mutex; frontier planning runs on background threads.
class SessionStore {
public:
    explicit SessionStore(std::filesystem::path state_dir);
    ~SessionStore();
    SessionStore(const SessionStore&) = delete;
    SessionStore& operator=(const SessionStore&) = delete;

    nlohmann::json create(const nlohmann::json& body);
    nlohmann::json get(const std::string& id);
    FrontierResponse frontier(const std::string& id, const std::string& region);
    nlohmann::json bands(const std::string& id, const std::string& region, int entry);
    nlohmann::json commit(const std::string& id, const std::string& region, const nlohmann::json& body);
    nlohmann::json advance(const std::string& id, const nlohmann::json& body);

    // Blocks until no planning job is running (tests, shutdown).
    void wait_idle();

private:
    struct Job {
        std::string token;
        std::string error;
        bool done = false;
    };
    struct Slot {
        std::mutex mutex;
        Session session;
        std::map<std::string, Job> jobs;
    };

    std::shared_ptr<Slot> find(const std::string& id);
    void save(const Session& s) const;
    void run_job(std::shared_ptr<Slot> slot, std::string key, std::string region, Session snapshot);

    std::filesystem::path state_dir_;
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
    std::vector<std::thread> workers_;
    std::size_t next_id_ = 1;
};

// Frontier body for a session snapshot (deterministic given the session seed).
std::string compute_frontier_body(const Session& session, const std::string& region);

class HttpServer {
public:
    HttpServer(std::filesystem::path state_dir);
    ~HttpServer();

    // Binds and serves on a background thread; port 0 picks a free port. Returns the bound port.
    int start(const std::string& host, int port);
    // Serves on the calling thread until stop().
    void listen(const std::string& host, int port);
    void stop();

    SessionStore& store() { return *store_; }

private:
    struct Impl;
    std::unique_ptr<SessionStore> store_;
    std::unique_ptr<Impl> impl_;
    std::thread thread_;
};

}  // namespace epiplan
