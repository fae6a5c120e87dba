#include "mechsearch/server.hpp"

#include <httplib.h>

#include "mechsearch/errors.hpp"

namespace mechsearch {

using nlohmann::json;

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownSession: return 404;
        case ErrorCode::SessionFinished:
        case ErrorCode::ConcurrentStep: return 409;
        case ErrorCode::BadRequest:
        case ErrorCode::BadSnapshot: return 400;
        case ErrorCode::IoError: return 500;
        default: return 422;
    }
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json error_body(std::string_view code, const std::string& message) {
    return {{"version", kProtocolVersion}, {"error", {{"code", std::string(code)}, {"message", message}}}};
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadRequest, std::string("body is not valid JSON: ") + e.what());
    }
}

template <typename F>
httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            send_json(res, 200, f(req));
        } catch (const Error& e) {
            send_json(res, http_status(e.code()), error_body(to_string(e.code()), e.what()));
        } catch (const std::exception& e) {
            send_json(res, 500, error_body("Internal", e.what()));
        }
    };
}

}  // namespace

struct SessionServer::Impl {
    SessionManager sessions;
    httplib::Server http;

    explicit Impl(SessionOptions options) : sessions(std::move(options)) {
        http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                  {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                  {"Access-Control-Allow-Headers", "Content-Type"}});
        http.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

        http.Post("/sessions", guarded([this](const httplib::Request& req) { return sessions.create(parse_body(req)); }));
        http.Get(R"(/sessions/([0-9A-Za-z]+))",
                 guarded([this](const httplib::Request& req) { return sessions.get(req.matches[1].str()); }));
        http.Post(R"(/sessions/([0-9A-Za-z]+)/step)",
                  guarded([this](const httplib::Request& req) { return sessions.step(req.matches[1].str(), parse_body(req)); }));
        http.Get(R"(/sessions/([0-9A-Za-z]+)/record)",
                 guarded([this](const httplib::Request& req) { return sessions.record(req.matches[1].str()); }));
        http.Get("/heaps", guarded([this](const httplib::Request&) { return sessions.list_heaps(); }));

        http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) send_json(res, res.status, error_body("NotFound", "no such route"));
        });
    }
};

SessionServer::SessionServer(SessionOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}
SessionServer::~SessionServer() { stop(); }

int SessionServer::bind_to_any_port(const std::string& host) {
    const int port = impl_->http.bind_to_any_port(host);
    if (port < 0) throw Error(ErrorCode::IoError, "cannot bind any port on " + host);
    return port;
}

void SessionServer::bind(const std::string& host, int port) {
    if (!impl_->http.bind_to_port(host, port)) throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
}

void SessionServer::serve() { impl_->http.listen_after_bind(); }
void SessionServer::stop() { impl_->http.stop(); }
void SessionServer::wait_until_ready() const { impl_->http.wait_until_ready(); }
SessionManager& SessionServer::sessions() { return impl_->sessions; }

}  // namespace mechsearch
