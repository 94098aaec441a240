#include "coda/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <random>
#include <sstream>

namespace coda {

namespace {

std::string trim(std::string s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        if (auto t = trim(cur); !t.empty())
            out.push_back(t);
    return out;
}

Time to_time(const std::string& s, const std::string& where)
{
    Time v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || v < 0)
        throw Error("FormatError", where + ": expected a time, got `" + s + "`");
    return v;
}

} // namespace

Scenario parse_scenario(const std::string& text, const std::string& file)
{
    Scenario sc;
    sc.text = text;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string where = (file.empty() ? "<scenario>" : file) + ":" + std::to_string(line);
        if (auto c = raw.find("//"); c != std::string::npos)
            raw.erase(c);
        const std::string l = trim(raw);
        if (l.empty())
            continue;
        std::istringstream ls(l);
        std::string word;
        ls >> word;
        if (word == "max-time") {
            std::string t;
            ls >> t;
            sc.max_time = to_time(t, where);
        } else if (word == "policy") {
            ls >> sc.policy;
            Policy::parse(sc.policy);
        } else if (word == "observe") {
            std::string rest;
            std::getline(ls, rest);
            for (auto& o : split(rest, ','))
                sc.observe.push_back(o);
        } else if (word == "expect") {
            std::string what;
            ls >> what;
            if (what != "deadlock")
                throw Error("FormatError", where + ": only `expect deadlock` is supported");
            sc.expect_deadlock = true;
        } else if (word == "at") {
            ScheduledFire f;
            f.line = line;
            std::string t, fire;
            ls >> t >> fire >> f.event;
            if (fire != "fire" || f.event.empty())
                throw Error("FormatError", where + ": expected `at <time> fire <component>.<operation>`");
            f.at = to_time(t, where);
            std::string with;
            if (ls >> with) {
                if (with != "with")
                    throw Error("FormatError", where + ": expected `with` before bindings");
                std::string rest;
                std::getline(ls, rest);
                for (const auto& b : split(rest, ',')) {
                    const auto eq = b.find('=');
                    if (eq == std::string::npos)
                        throw Error("FormatError", where + ": binding `" + b + "` is not of the form k=v");
                    f.bindings[trim(b.substr(0, eq))] = trim(b.substr(eq + 1));
                }
            }
            sc.fires.push_back(std::move(f));
        } else {
            throw Error("FormatError", where + ": unknown directive `" + word + "`");
        }
    }
    std::stable_sort(sc.fires.begin(), sc.fires.end(),
                     [](const ScheduledFire& a, const ScheduledFire& b) { return a.at < b.at; });
    return sc;
}

Policy Policy::parse(const std::string& text)
{
    Policy p;
    if (text == "lex")
        return p;
    if (text == "reverse") {
        p.kind = Kind::Reverse;
        return p;
    }
    if (text.rfind("random:", 0) == 0) {
        p.kind = Kind::Random;
        const std::string n = text.substr(7);
        auto [ptr, ec] = std::from_chars(n.data(), n.data() + n.size(), p.seed);
        if (ec == std::errc{} && ptr == n.data() + n.size())
            return p;
    }
    throw Error("BadPolicy", "unknown policy `" + text + "` (expected lex, reverse or random:<seed>)");
}

void order_by_policy(const Kernel& k, std::vector<Event>& events, const Policy& p, std::uint64_t& rng_state)
{
    const auto& m = k.model();
    std::vector<std::pair<std::string, std::string>> keys;
    std::vector<size_t> idx(events.size());
    for (size_t i = 0; i < events.size(); ++i) {
        idx[i] = i;
        const auto& e = events[i];
        keys.emplace_back(e.comp >= 0 ? m.components[e.comp].name : std::string("~"), k.event_name(e));
    }
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return keys[a] < keys[b]; });
    if (p.kind == Policy::Kind::Reverse) {
        // Reverse by key only; keep candidates with equal keys in model order.
        std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return keys[a] > keys[b]; });
    } else if (p.kind == Policy::Kind::Random && !idx.empty()) {
        std::mt19937_64 rng(rng_state);
        const size_t pick = std::uniform_int_distribution<size_t>(0, idx.size() - 1)(rng);
        rng_state = rng();
        std::rotate(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(pick), idx.begin() + static_cast<std::ptrdiff_t>(pick) + 1);
    }
    std::vector<Event> sorted;
    sorted.reserve(events.size());
    for (size_t i : idx)
        sorted.push_back(std::move(events[i]));
    events = std::move(sorted);
}

RunResult run(const Kernel& k, const Scenario& sc, const RunOptions& opts)
{
    const Policy policy = Policy::parse(opts.policy.value_or(sc.policy));
    const Time max_time = opts.max_time.value_or(sc.max_time);
    std::uint64_t rng = policy.seed;

    RunResult res;
    RuntimeState s = k.init();
    for (const auto& o : sc.observe)
        if (!k.observe(s, o))
            throw Error("UnknownObservable", "observable `" + o + "` is not a variable, state machine or connector of model `" +
                                                 k.model().name + "`");
    auto push = [&](EventRecord rec) {
        res.records.push_back(std::move(rec));
        if (!sc.observe.empty()) {
            std::vector<std::string> row;
            for (const auto& o : sc.observe)
                row.push_back(*k.observe(s, o));
            res.observations.push_back(std::move(row));
        }
    };

    size_t next_fire = 0;
    for (;;) {
        while (next_fire < sc.fires.size() && sc.fires[next_fire].at < s.now)
            ++next_fire; // scheduled before a point the run never reached
        for (; next_fire < sc.fires.size() && sc.fires[next_fire].at == s.now; ++next_fire) {
            const auto& f = sc.fires[next_fire];
            auto cands = k.matching(s, f.event, f.bindings);
            if (cands.empty()) {
                std::string msg = "scenario line " + std::to_string(f.line) + ": `" + f.event + "` is not enabled at time " +
                                  std::to_string(s.now);
                for (const auto& w : k.explain(s, k.lookup(f.event, f.bindings)))
                    msg += "; " + w;
                throw Error("ScheduleUnsatisfiable", msg);
            }
            order_by_policy(k, cands, policy, rng);
            push(k.fire_unchecked(s, cands.front()));
        }
        for (int steps = 0;; ++steps) {
            auto en = k.enabled(s);
            std::erase_if(en, [&](const Event& e) {
                return e.kind == EventKind::Tick ||
                       (e.kind == EventKind::Operation && k.model().components[e.comp].operations[e.op].kind == OpKind::E);
            });
            if (en.empty())
                break;
            if (steps >= opts.max_steps_per_cycle)
                throw Error("Livelock", "more than " + std::to_string(opts.max_steps_per_cycle) +
                                            " events without a tick at time " + std::to_string(s.now));
            order_by_policy(k, en, policy, rng);
            push(k.fire_unchecked(s, en.front()));
        }
        if (s.now >= max_time)
            break;
        if (!k.tick_enabled(s)) {
            res.deadlocked = true;
            res.deadlock_reason = "deadlock at time " + std::to_string(s.now);
            for (const auto& w : k.tick_blockers(s))
                res.deadlock_reason += "; " + w;
            break;
        }
        push(k.tick(s));
    }
    res.final_state = std::move(s);
    return res;
}

RuntimeState replay(const Kernel& k, const std::vector<EventRecord>& records)
{
    RuntimeState s = k.init();
    for (size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.time != s.now)
            throw Error("ReplayMismatch", "record " + std::to_string(i) + " (`" + r.event + "`) is stamped " +
                                              std::to_string(r.time) + " but the clock is at " + std::to_string(s.now));
        if (r.event == "tick") {
            if (!k.tick_enabled(s))
                throw Error("ReplayMismatch", "record " + std::to_string(i) + ": tick not enabled at time " +
                                                  std::to_string(s.now));
            k.tick(s);
            continue;
        }
        std::map<std::string, std::string> binds(r.bindings.begin(), r.bindings.end());
        std::vector<Event> cands;
        try {
            cands = k.matching(s, r.event, binds);
        } catch (const Error& e) {
            throw Error("ReplayMismatch", "record " + std::to_string(i) + ": " + e.what());
        }
        auto it = std::find_if(cands.begin(), cands.end(), [&](const Event& e) { return k.linked_names(e) == r.transitions; });
        if (it == cands.end())
            throw Error("ReplayMismatch", "record " + std::to_string(i) + ": `" + r.event + "` is not enabled at time " +
                                              std::to_string(s.now));
        k.fire_unchecked(s, *it);
    }
    return s;
}

} // namespace coda
