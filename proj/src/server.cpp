#include "coda/server.hpp"

#include "coda/loader.hpp"
#include "coda/oracle.hpp"
#include "coda/scenario.hpp"

#include "httplib.h"

#include <cstdlib>
#include <deque>
#include <iostream>
#include <limits>

namespace coda {

struct SessionStore::Session
{
    std::mutex mu;
    std::string id;
    Model model;
    std::unique_ptr<Kernel> kernel;
    RuntimeState state;
    struct Saved
    {
        RuntimeState state;
        size_t trace_len;
    };
    std::deque<Saved> undo;
    std::vector<EventRecord> trace;
};

namespace {

Response error(int status, const std::string& code, const std::string& message, Json extra = Json::object())
{
    Json e = {{"code", code}, {"message", message}};
    for (auto& [k, v] : extra.items())
        e[k] = v;
    return {status, {{"error", e}}};
}

std::vector<std::string> split_path(const std::string& path)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : path) {
        if (c == '/') {
            if (!cur.empty())
                out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty())
        out.push_back(std::move(cur));
    return out;
}

} // namespace

std::shared_ptr<SessionStore::Session> SessionStore::find(const std::string& id)
{
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

Response SessionStore::handle(const std::string& method, const std::string& path, const std::string& body)
{
    const auto parts = split_path(path);
    if (parts.size() < 2 || parts[0] != "v1")
        return error(404, "NotFound", "no route " + method + " " + path);
    Json j = Json::object();
    if (!body.empty()) {
        j = Json::parse(body, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            return error(400, "MalformedBody", "request body is not a JSON object");
    }
    if (parts.size() == 2 && parts[1] == "health" && method == "GET")
        return {200, {{"status", "ok"}}};
    if (parts[1] != "sessions")
        return error(404, "NotFound", "no route " + method + " " + path);
    if (parts.size() == 2) {
        if (method == "POST")
            return create(j);
        if (method == "GET") {
            std::lock_guard lock(mu_);
            Json ids = Json::array();
            for (const auto& [id, s] : sessions_)
                ids.push_back(id);
            return {200, {{"sessions", ids}}};
        }
        return error(404, "NotFound", "no route " + method + " " + path);
    }
    auto session = find(parts[2]);
    if (!session)
        return error(404, "UnknownSession", "no session `" + parts[2] + "`");
    if (parts.size() == 3) {
        if (method != "DELETE")
            return error(404, "NotFound", "no route " + method + " " + path);
        std::lock_guard lock(mu_);
        sessions_.erase(parts[2]);
        return {200, {{"deleted", parts[2]}}};
    }
    if (parts.size() != 4)
        return error(404, "NotFound", "no route " + method + " " + path);
    std::lock_guard lock(session->mu);
    return dispatch(*session, method, parts[3], j);
}

Response SessionStore::create(const Json& body)
{
    if (!body.contains("model") || !body["model"].is_string())
        return error(400, "MalformedBody", "`model` (model source text) is required");
    auto s = std::make_shared<Session>();
    try {
        s->model = load_model_text(body["model"].get<std::string>(), body.value("name", std::string("<session>")));
    } catch (const DiagnosticError& e) {
        Json diags = Json::array();
        for (const auto& d : e.diagnostics())
            diags.push_back({{"code", d.code}, {"message", d.message}, {"span", d.span.str()}});
        return error(400, e.code(), "model does not validate", {{"diagnostics", diags}});
    } catch (const Error& e) {
        return error(400, e.code(), e.what());
    }
    KernelOptions ko;
    ko.env_bound = std::numeric_limits<int>::max();
    if (body.contains("env_bound")) {
        if (!body["env_bound"].is_number_integer() || body["env_bound"].get<int>() < 0)
            return error(400, "MalformedBody", "`env_bound` must be a non-negative integer");
        ko.env_bound = body["env_bound"].get<int>();
    }
    s->kernel = std::make_unique<Kernel>(s->model, ko);
    s->state = s->kernel->init();
    {
        std::lock_guard lock(mu_);
        s->id = "s" + std::to_string(next_id_++);
        sessions_[s->id] = s;
    }
    return {201, {{"id", s->id}, {"model", s->model.name}, {"state", state_to_json(*s->kernel, s->state)}}};
}

Response SessionStore::dispatch(Session& s, const std::string& method, const std::string& action, const Json& body)
{
    const Kernel& k = *s.kernel;
    auto push_undo = [&] {
        s.undo.push_back({s.state, s.trace.size()});
        while (s.undo.size() > undo_depth_)
            s.undo.pop_front();
    };
    auto stepped = [&](const EventRecord& rec) -> Response {
        return {200, {{"record", record_to_json(rec)}, {"state", state_to_json(k, s.state)}}};
    };

    if (method == "GET" && action == "state")
        return {200, state_to_json(k, s.state)};
    if (method == "GET" && action == "enabled") {
        Json events = Json::array();
        for (const auto& e : k.enabled(s.state))
            events.push_back(event_to_json(k, s.state, e));
        return {200, {{"current_time", s.state.now}, {"events", events}}};
    }
    if (method == "GET" && action == "trace") {
        Json recs = Json::array();
        for (const auto& r : s.trace)
            recs.push_back(record_to_json(r));
        return {200, {{"model", s.model.name}, {"records", recs}}};
    }
    if (method != "POST")
        return error(404, "NotFound", "no route " + method + " " + action);

    if (action == "fire") {
        if (!body.contains("event") || !body["event"].is_string())
            return error(400, "MalformedBody", "`event` is required");
        const std::string name = body["event"].get<std::string>();
        if (name == "tick")
            return dispatch(s, method, "tick", Json::object());
        std::map<std::string, std::string> binds;
        if (body.contains("bindings")) {
            if (!body["bindings"].is_object())
                return error(400, "MalformedBody", "`bindings` must be an object");
            for (const auto& [p, v] : body["bindings"].items())
                binds[p] = v.is_string() ? v.get<std::string>() : v.dump();
        }
        std::vector<Event> cands;
        try {
            cands = k.matching(s.state, name, binds);
        } catch (const Error& e) {
            return error(400, e.code(), e.what());
        }
        if (body.contains("transitions")) {
            if (!body["transitions"].is_array())
                return error(400, "MalformedBody", "`transitions` must be an array");
            const auto want = body["transitions"].get<std::vector<std::string>>();
            std::erase_if(cands, [&](const Event& e) { return k.linked_names(e) != want; });
        }
        if (cands.empty()) {
            std::vector<std::string> why;
            try {
                why = k.explain(s.state, k.lookup(name, binds));
            } catch (const Error&) {
            }
            if (why.empty())
                why.push_back("no enabled combination of linked transitions matches");
            return error(409, "NotEnabled", "`" + name + "` is not enabled at time " + std::to_string(s.state.now),
                         {{"failed", why}});
        }
        push_undo();
        try {
            EventRecord rec = k.fire_unchecked(s.state, cands.front());
            s.trace.push_back(rec);
            return stepped(rec);
        } catch (const Error& e) {
            s.state = s.undo.back().state;
            s.undo.pop_back();
            return error(409, e.code(), e.what());
        }
    }
    if (action == "tick") {
        if (!k.tick_enabled(s.state))
            return error(409, "NotEnabled", "tick is not enabled at time " + std::to_string(s.state.now),
                         {{"failed", k.tick_blockers(s.state)}});
        push_undo();
        EventRecord rec = k.tick(s.state);
        s.trace.push_back(rec);
        return stepped(rec);
    }
    if (action == "undo") {
        if (s.undo.empty())
            return error(409, "NothingToUndo", "undo history is empty");
        s.state = std::move(s.undo.back().state);
        s.trace.resize(s.undo.back().trace_len);
        s.undo.pop_back();
        return {200, {{"state", state_to_json(k, s.state)}, {"undo_left", s.undo.size()}}};
    }
    if (action == "reset") {
        s.state = k.init();
        s.trace.clear();
        s.undo.clear();
        return {200, {{"state", state_to_json(k, s.state)}}};
    }
    if (action == "golden") {
        std::vector<std::string> observe;
        if (body.contains("observe")) {
            if (!body["observe"].is_array())
                return error(400, "MalformedBody", "`observe` must be an array of observable names");
            for (const auto& o : body["observe"]) {
                if (!o.is_string())
                    return error(400, "MalformedBody", "`observe` must be an array of observable names");
                observe.push_back(o.get<std::string>());
            }
        }
        try {
            std::optional<Scenario> sc;
            if (body.contains("scenario")) {
                if (!body["scenario"].is_string())
                    return error(400, "MalformedBody", "`scenario` must be scenario text");
                sc = parse_scenario(body["scenario"].get<std::string>());
            }
            const Golden g = golden_from_trace(s.model, s.trace, observe, sc ? &*sc : nullptr);
            return {200, {{"golden", golden_to_text(g)}, {"records", g.records.size()}}};
        } catch (const Error& e) {
            return error(400, e.code(), e.what());
        }
    }
    return error(404, "NotFound", "no route " + method + " " + action);
}

int default_port()
{
    if (const char* p = std::getenv("CODA_PORT")) {
        char* end = nullptr;
        const long v = std::strtol(p, &end, 10);
        if (end && *end == '\0' && v > 0 && v < 65536)
            return static_cast<int>(v);
    }
    return 8787;
}

struct HttpService::Impl
{
    ServiceOptions opts;
    SessionStore store;
    httplib::Server srv;

    explicit Impl(const ServiceOptions& o) : opts(o), store(o.undo_depth) {}
};

HttpService::HttpService(const ServiceOptions& opts) : impl_(std::make_unique<Impl>(opts))
{
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
        Response r;
        try {
            r = impl_->store.handle(req.method, req.path, req.body);
        } catch (const std::exception& e) {
            r = error(500, "InternalError", e.what());
        }
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
        res.set_header("Access-Control-Allow-Origin", "*");
    };
    auto& srv = impl_->srv;
    srv.Get(R"(/.*)", route);
    srv.Post(R"(/.*)", route);
    srv.Delete(R"(/.*)", route);
    srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
}

HttpService::~HttpService() = default;

int HttpService::bind()
{
    const auto& o = impl_->opts;
    const int port = o.port == 0 ? impl_->srv.bind_to_any_port(o.host)
                                 : (impl_->srv.bind_to_port(o.host, o.port) ? o.port : -1);
    if (port < 0)
        throw Error("IOError", "cannot listen on " + o.host + ":" + std::to_string(o.port));
    return port;
}

void HttpService::run()
{
    impl_->srv.listen_after_bind();
}

void HttpService::stop()
{
    impl_->srv.stop();
}

void serve(const ServiceOptions& opts)
{
    HttpService svc(opts);
    const int port = svc.bind();
    std::cerr << "listening on http://" << opts.host << ":" << port << "/v1\n";
    svc.run();
}

} // namespace coda
