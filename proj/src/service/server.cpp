#include <atomic>
#include <chrono>

#include "httplib.h"

#include "epiplan/service.hpp"

namespace epiplan {

using nlohmann::json;

struct HttpServer::Impl {
    httplib::Server server;
};

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw ServiceError(400, "bad_request", std::string("malformed JSON: ") + e.what());
    }
}

template <class F>
httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const ServiceError& e) {
            send_json(res, e.status, e.body());
        } catch (const std::exception& e) {
            send_json(res, 500, {{"code", "internal"}, {"message", e.what()}, {"detail", nullptr}});
        }
    };
}

}  // namespace

HttpServer::HttpServer(std::filesystem::path state_dir)
    : store_(std::make_unique<SessionStore>(std::move(state_dir))), impl_(std::make_unique<Impl>()) {
    auto& srv = impl_->server;
    SessionStore* store = store_.get();

    srv.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { send_json(res, 200, {{"status", "ok"}}); });

    srv.Post("/sessions", guarded([store](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, 201, store->create(parse_body(req)));
             }));

    srv.Get(R"(/sessions/([^/]+))", guarded([store](const httplib::Request& req, httplib::Response& res) {
                send_json(res, 200, store->get(req.matches[1]));
            }));

    srv.Get(R"(/sessions/([^/]+)/regions/([^/]+)/frontier)",
            guarded([store](const httplib::Request& req, httplib::Response& res) {
                auto f = store->frontier(req.matches[1], req.matches[2]);
                if (f.status == 200) {
                    res.set_header("ETag", f.etag);
                    if (req.get_header_value("If-None-Match") == f.etag) {
                        res.status = 304;
                        return;
                    }
                }
                res.status = f.status;
                res.set_content(f.body, "application/json");
            }));

    srv.Get(R"(/sessions/([^/]+)/regions/([^/]+)/policies/(\d+)/bands)",
            guarded([store](const httplib::Request& req, httplib::Response& res) {
                send_json(res, 200, store->bands(req.matches[1], req.matches[2], std::stoi(req.matches[3])));
            }));

    srv.Post(R"(/sessions/([^/]+)/regions/([^/]+)/action)",
             guarded([store](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, 200, store->commit(req.matches[1], req.matches[2], parse_body(req)));
             }));

    srv.Post(R"(/sessions/([^/]+)/advance)", guarded([store](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, 200, store->advance(req.matches[1], parse_body(req)));
             }));
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
    auto& srv = impl_->server;
    int bound = port;
    if (port == 0) {
        bound = srv.bind_to_any_port(host);
    } else if (!srv.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([&srv] { srv.listen_after_bind(); });
    srv.wait_until_ready();
    return bound;
}

void HttpServer::listen(const std::string& host, int port) {
    if (!impl_->server.listen(host, port))
        throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
    if (thread_.joinable()) thread_.join();
    if (store_) store_->wait_idle();
}

}  // namespace epiplan
