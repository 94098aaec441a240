#pragma once

// Interactive sessions over HTTP/JSON, routes under /v1:
//
//   POST   /v1/sessions               {"model": text, "env_bound"?: n}   -> 201 {id, state}
//   GET    /v1/sessions/{id}/state
//   GET    /v1/sessions/{id}/enabled
//   POST   /v1/sessions/{id}/fire     {"event", "bindings"?, "transitions"?}
//   POST   /v1/sessions/{id}/tick
//   POST   /v1/sessions/{id}/undo
//   POST   /v1/sessions/{id}/reset
//   GET    /v1/sessions/{id}/trace
//   POST   /v1/sessions/{id}/golden   {"observe": [..], "scenario"?: text}
//   DELETE /v1/sessions/{id}
//
// Errors are {"error": {"code", "message", ...}} with 400 (malformed body,
// invalid model, unknown event), 404 (unknown session or route) or 409
// (NotEnabled, NothingToUndo).

#include "coda/json_io.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace coda {

struct ServiceOptions
{
    std::string host = "127.0.0.1";
    int port = 8787;
    size_t undo_depth = 1000;
};

struct Response
{
    int status = 200;
    Json body;
};

class SessionStore
{
public:
    explicit SessionStore(size_t undo_depth = 1000) : undo_depth_(undo_depth) {}

    // Routes one request; `path` excludes the query string.
    Response handle(const std::string& method, const std::string& path, const std::string& body);

private:
    struct Session;
    std::shared_ptr<Session> find(const std::string& id);
    Response create(const Json& body);
    Response dispatch(Session& s, const std::string& method, const std::string& action, const Json& body);

    std::mutex mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    unsigned long next_id_ = 1;
    size_t undo_depth_;
};

// Default port from CODA_PORT when set, else 8787.
int default_port();

// HTTP front end over a SessionStore.
class HttpService
{
public:
    explicit HttpService(const ServiceOptions& opts);
    ~HttpService();
    // Binds the socket; port 0 picks a free one. Returns the bound port.
    // Throws Error("IOError").
    int bind();
    // Serves until stop() is called from another thread.
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Blocks until the process is stopped.
void serve(const ServiceOptions& opts);

} // namespace coda
