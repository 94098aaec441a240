#include "coda/json_io.hpp"
#include "coda/parser.hpp"
#include "coda/scenario.hpp"

#include <sstream>

namespace coda {

Json record_to_json(const EventRecord& r)
{
    Json j;
    j["event"] = r.event;
    j["kind"] = r.kind;
    j["time"] = r.time;
    j["bindings"] = Json::object();
    for (const auto& [k, v] : r.bindings)
        j["bindings"][k] = v;
    j["received"] = Json::object();
    for (const auto& [k, v] : r.received)
        j["received"][k] = v;
    j["sends"] = Json::array();
    for (const auto& s : r.sends)
        j["sends"].push_back({{"connector", s.connector}, {"value", s.value}, {"at", s.at}});
    j["wakes"] = r.wakes;
    j["calls"] = r.calls;
    j["deltas"] = Json::array();
    for (const auto& d : r.deltas)
        j["deltas"].push_back({{"var", d.var}, {"before", d.before}, {"after", d.after}});
    j["transitions"] = r.transitions;
    j["warnings"] = r.warnings;
    return j;
}

EventRecord record_from_json(const Json& j)
{
    try {
        EventRecord r;
        r.event = j.at("event").get<std::string>();
        r.kind = j.value("kind", std::string{});
        r.time = j.at("time").get<Time>();
        if (j.contains("bindings"))
            for (const auto& [k, v] : j["bindings"].items())
                r.bindings.emplace_back(k, v.get<std::string>());
        if (j.contains("received"))
            for (const auto& [k, v] : j["received"].items())
                r.received.emplace_back(k, v.get<std::string>());
        if (j.contains("sends"))
            for (const auto& s : j["sends"])
                r.sends.push_back({s.at("connector").get<std::string>(), s.at("value").get<std::string>(),
                                   s.at("at").get<Time>()});
        if (j.contains("wakes"))
            r.wakes = j["wakes"].get<std::vector<Time>>();
        if (j.contains("calls"))
            r.calls = j["calls"].get<std::vector<std::string>>();
        if (j.contains("deltas"))
            for (const auto& d : j["deltas"])
                r.deltas.push_back({d.at("var").get<std::string>(), d.at("before").get<std::string>(),
                                    d.at("after").get<std::string>()});
        if (j.contains("transitions"))
            r.transitions = j["transitions"].get<std::vector<std::string>>();
        if (j.contains("warnings"))
            r.warnings = j["warnings"].get<std::vector<std::string>>();
        return r;
    } catch (const Json::exception& e) {
        throw Error("FormatError", std::string("malformed trace record: ") + e.what());
    }
}

std::string trace_to_jsonl(const Model& m, const std::vector<EventRecord>& records)
{
    std::string out;
    Json header = {{"format", "coda-trace"},
                   {"version", 1},
                   {"model", m.name},
                   {"model-hash", model_hash(m)},
                   {"semantics", "coda-kernel/1"},
                   {"records", records.size()}};
    out += header.dump() + "\n";
    for (const auto& r : records)
        out += record_to_json(r).dump() + "\n";
    return out;
}

std::vector<EventRecord> trace_from_jsonl(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::vector<EventRecord> out;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::exception& e) {
            throw Error("FormatError", std::string("trace line is not JSON: ") + e.what());
        }
        if (!header) {
            if (j.value("format", std::string{}) != "coda-trace")
                throw Error("FormatError", "missing coda-trace header");
            header = true;
            continue;
        }
        out.push_back(record_from_json(j));
    }
    if (!header)
        throw Error("FormatError", "empty trace file");
    return out;
}

Json state_to_json(const Kernel& k, const RuntimeState& s)
{
    const Model& m = k.model();
    Json j;
    j["current_time"] = s.now;
    j["connectors"] = Json::object();
    for (size_t c = 0; c < m.connectors.size(); ++c) {
        Json entries = Json::array();
        for (const auto& [t, v] : s.channels[c])
            entries.push_back({{"time", t}, {"value", render_value(m, m.connectors[c].type, v)}});
        auto rv = k.recv_value(s, static_cast<int>(c));
        j["connectors"][m.connectors[c].name] = {
            {"type", m.connectors[c].type.str()},
            {"from", m.connectors[c].source},
            {"to", m.connectors[c].target},
            {"entries", entries},
            {"current", rv ? Json(render_value(m, m.connectors[c].type, *rv)) : Json(nullptr)}};
    }
    j["components"] = Json::object();
    for (size_t c = 0; c < m.components.size(); ++c) {
        const auto& comp = m.components[c];
        Json cj;
        cj["variables"] = Json::object();
        for (size_t v = 0; v < comp.vars.size(); ++v)
            cj["variables"][comp.vars[v].name] = render_value(m, comp.vars[v].type, s.vars[c][v]);
        cj["wakeups"] = Json::array();
        for (const auto& [t, w] : s.wakes[c])
            cj["wakeups"].push_back({{"time", t}, {"kind", "DEFAULT"}});
        cj["machines"] = Json::object();
        for (size_t mi = 0; mi < comp.machines.size(); ++mi) {
            const auto& sm = comp.machines[mi];
            const int leaf = s.config[k.global_machine(static_cast<int>(c), static_cast<int>(mi))];
            Json path = Json::array();
            for (int st = leaf; st >= 0; st = sm.states[st].parent)
                path.insert(path.begin(), sm.states[st].name);
            cj["machines"][sm.name] = {{"mode", sm.mode == MachineMode::Sync ? "sync" : "async"},
                                       {"active", leaf >= 0},
                                       {"state", leaf >= 0 ? Json(sm.states[leaf].name) : Json(nullptr)},
                                       {"path", path}};
        }
        j["components"][comp.name] = cj;
    }
    Json flags = Json::object();
    for (size_t b = 0; b < k.layout().bit_names.size(); ++b)
        flags[k.layout().bit_names[b]] = s.fired[b] != 0;
    j["sync_flags"] = flags;
    j["pending_methods"] = Json::array();
    for (const auto& p : s.pending)
        j["pending_methods"].push_back(m.components[p.comp].name + "." + m.components[p.comp].operations[p.op].name);
    j["env_count"] = s.env_count;
    j["tick_enabled"] = k.tick_enabled(s);
    j["tick_blockers"] = k.tick_blockers(s);
    return j;
}

Json event_to_json(const Kernel& k, const RuntimeState& s, const Event& e)
{
    const Model& m = k.model();
    Json j;
    j["event"] = k.event_name(e);
    j["kind"] = k.kind_name(e);
    j["bindings"] = Json::object();
    for (const auto& [n, v] : k.bindings(e))
        j["bindings"][n] = v;
    j["transitions"] = k.linked_names(e);
    Json witness = Json::array();
    if (e.kind == EventKind::Operation) {
        const auto& op = m.components[e.comp].operations[e.op];
        if (op.kind == OpKind::P)
            for (int c : op.wake_ids)
                witness.push_back("delivery on " + m.connectors[c].name + " = " +
                                  render_value(m, m.connectors[c].type, s.channels[c].at(s.now)));
        else if (op.kind == OpKind::S)
            witness.push_back("self-wake due at " + std::to_string(s.now));
        else if (op.kind == OpKind::M)
            witness.push_back("pending call");
        else if (op.kind == OpKind::E)
            witness.push_back("environment events this cycle: " + std::to_string(s.env_count));
        for (const auto& g : op.guards)
            witness.push_back("guard " + to_string(g));
    } else if (e.kind == EventKind::Tick) {
        witness.push_back("all deliveries and wake-ups due at " + std::to_string(s.now) + " answered");
    }
    j["witness"] = witness;
    return j;
}

} // namespace coda
