#pragma once

#include <memory>
#include <string>

#include "mechsearch/errors.hpp"
#include "mechsearch/session.hpp"

namespace mechsearch {

/// HTTP front end for a SessionManager:
///   POST /sessions               create, body as SessionManager::create
///   GET  /sessions/{id}          current observation
///   POST /sessions/{id}/step     one supervisor action
///   GET  /sessions/{id}/record   rollout record so far
///   GET  /heaps                  heap files available to create from
/// Errors come back as {"version", "error": {"code", "message"}}.
class SessionServer {
public:
    explicit SessionServer(SessionOptions options);
    ~SessionServer();
    SessionServer(const SessionServer&) = delete;
    SessionServer& operator=(const SessionServer&) = delete;

    /// Binds an ephemeral port on host and returns it. Follow with serve().
    int bind_to_any_port(const std::string& host = "127.0.0.1");
    /// Throws IoError when the port cannot be bound.
    void bind(const std::string& host, int port);
    /// Blocks until stop() is called.
    void serve();
    void stop();
    void wait_until_ready() const;

    SessionManager& sessions();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// HTTP status for a library error code.
int http_status(ErrorCode code);

}  // namespace mechsearch
