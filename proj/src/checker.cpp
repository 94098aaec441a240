#include "coda/checker.hpp"

#include <chrono>
#include <deque>
#include <iomanip>
#include <map>
#include <sstream>
#include <unordered_map>

namespace coda {

const char* verdict_name(Verdict v)
{
    switch (v) {
    case Verdict::Holds:
        return "holds-within-bounds";
    case Verdict::Violated:
        return "violated";
    case Verdict::BoundExhausted:
        return "bound-exhausted";
    }
    return "?";
}

double CheckResult::transition_coverage() const
{
    size_t total = 0, hit = 0;
    for (const auto& c : coverage)
        if (c.transition) {
            ++total;
            hit += c.count > 0;
        }
    return total ? static_cast<double>(hit) / static_cast<double>(total) : 1.0;
}

double CheckResult::operation_coverage() const
{
    size_t total = 0, hit = 0;
    for (const auto& c : coverage)
        if (!c.transition) {
            ++total;
            hit += c.count > 0;
        }
    return total ? static_cast<double>(hit) / static_cast<double>(total) : 1.0;
}

std::string configuration_text(const Kernel& k, const RuntimeState& s)
{
    std::string out;
    for (int g = 0; g < k.layout().machine_count; ++g) {
        const auto& sm = k.machine_of(g);
        if (!out.empty())
            out += ' ';
        out += k.model().components[k.comp_of_machine(g)].name + "." + sm.name + "=" +
               (s.config[g] < 0 ? std::string("-") : sm.states[s.config[g]].name);
    }
    return out;
}

namespace {

struct Node
{
    int parent = -1;
    Event via;
    Time time = 0;
};

std::vector<EventRecord> path_to(const Kernel& k, const std::vector<Node>& nodes, int id, RuntimeState* end)
{
    std::vector<const Event*> events;
    for (int n = id; nodes[n].parent >= 0; n = nodes[n].parent)
        events.push_back(&nodes[n].via);
    std::vector<EventRecord> out;
    RuntimeState s = k.init();
    for (auto it = events.rbegin(); it != events.rend(); ++it)
        out.push_back(k.fire_unchecked(s, **it));
    if (end)
        *end = std::move(s);
    return out;
}

} // namespace

CheckResult explore(const Model& m, const CheckConfig& cfg)
{
    if (cfg.max_time < 1 || cfg.max_states < 1)
        throw Error("BadConfig", "max_time and max_states must be at least 1");
    const auto t0 = std::chrono::steady_clock::now();
    KernelOptions ko;
    ko.env_bound = cfg.env_bound;
    ko.strict_collisions = cfg.strict_collisions;
    ko.prune = cfg.canonical;
    const Kernel k(m, ko);

    CheckResult res;
    std::map<std::string, size_t> cov_index;
    for (const auto& comp : m.components) {
        for (const auto& sm : comp.machines)
            for (const auto& t : sm.transitions) {
                cov_index[comp.name + "." + sm.name + "." + t.name] = res.coverage.size();
                res.coverage.push_back({comp.name + "." + sm.name + "." + t.name, true, 0});
            }
        for (const auto& op : comp.operations) {
            cov_index[comp.name + "." + op.name] = res.coverage.size();
            res.coverage.push_back({comp.name + "." + op.name, false, 0});
        }
    }
    auto cover = [&](const Event& e) {
        if (e.kind == EventKind::Tick)
            return;
        const auto& comp = m.components[e.comp];
        if (e.kind == EventKind::Operation) {
            ++res.coverage[cov_index[comp.name + "." + comp.operations[e.op].name]].count;
            for (auto [mi, ti] : e.linked)
                ++res.coverage[cov_index[comp.name + "." + comp.machines[mi].name + "." +
                                         comp.machines[mi].transitions[ti].name]]
                      .count;
        } else {
            const auto& sm = comp.machines[e.machine];
            ++res.coverage[cov_index[comp.name + "." + sm.name + "." + sm.transitions[e.transition].name]].count;
        }
    };

    bool inv_done = !cfg.invariants;
    bool dl_done = !cfg.deadlock;
    bool err_done = false;
    auto report = [&](const std::string& prop, const std::string& desc, int node, const std::vector<Node>& nodes,
                      std::vector<EventRecord> extra) {
        Violation v;
        v.property = prop;
        v.description = desc;
        RuntimeState end;
        v.trace = path_to(k, nodes, node, &end);
        v.configuration = configuration_text(k, end);
        for (auto& r : extra)
            v.trace.push_back(std::move(r));
        res.violations.push_back(std::move(v));
    };

    std::vector<Node> nodes;
    std::unordered_map<std::string, Time> best; // canonical key -> earliest time seen
    std::map<Time, std::deque<std::pair<int, RuntimeState>>> buckets;
    size_t frontier = 0;

    auto visit = [&](RuntimeState s, int parent, const Event* via) -> bool {
        std::string key = k.canonical_key(s, cfg.canonical);
        auto it = best.find(key);
        if (it != best.end() && it->second <= s.now)
            return false;
        if (it == best.end()) {
            if (best.size() >= cfg.max_states) {
                res.exhausted = true;
                return false;
            }
            best.emplace(std::move(key), s.now);
        } else {
            it->second = s.now;
        }
        Node n;
        n.parent = parent;
        if (via)
            n.via = *via;
        n.time = s.now;
        nodes.push_back(std::move(n));
        const int id = static_cast<int>(nodes.size()) - 1;
        if (!inv_done) {
            auto bad = k.violated_invariants(s);
            if (!bad.empty()) {
                std::string desc;
                for (const auto& b : bad)
                    desc += (desc.empty() ? "" : "; ") + b;
                report("invariant", desc + " at time " + std::to_string(s.now), id, nodes, {});
                inv_done = !cfg.all_violations;
            }
        }
        const Time t = s.now;
        buckets[t].emplace_back(id, std::move(s));
        res.frontier_peak = std::max(res.frontier_peak, ++frontier);
        return true;
    };

    visit(k.init(), -1, nullptr);
    while (!buckets.empty() && !(inv_done && dl_done && err_done)) {
        auto bucket = buckets.begin();
        auto [id, s] = std::move(bucket->second.front());
        bucket->second.pop_front();
        if (bucket->second.empty())
            buckets.erase(bucket);
        --frontier;
        if (best[k.canonical_key(s, cfg.canonical)] < s.now)
            continue; // superseded by an earlier visit

        const auto en = k.enabled(s);
        if (en.empty() && !dl_done) {
            std::string desc = "deadlock at time " + std::to_string(s.now);
            for (const auto& w : k.tick_blockers(s))
                desc += "; " + w;
            report("deadlock", desc, id, nodes, {});
            dl_done = !cfg.all_violations;
        }
        for (const auto& e : en) {
            if (e.kind == EventKind::Tick && s.now >= cfg.max_time)
                continue;
            RuntimeState next = s;
            ++res.edges;
            try {
                k.fire_unchecked(next, e);
            } catch (const Error& err) {
                if (!err_done) {
                    EventRecord failed;
                    failed.event = k.event_name(e);
                    failed.kind = k.kind_name(e);
                    failed.time = s.now;
                    failed.bindings = k.bindings(e);
                    failed.transitions = k.linked_names(e);
                    failed.warnings.push_back(err.code() + ": " + err.what());
                    report("runtime-error", err.code() + ": " + err.what(), id, nodes, {failed});
                    err_done = !cfg.all_violations;
                }
                continue;
            }
            cover(e);
            visit(std::move(next), id, &e);
        }
    }

    res.states = best.size();
    for (const auto& v : res.violations) {
        if (v.property == "invariant")
            res.invariants = Verdict::Violated;
        else if (v.property == "deadlock")
            res.deadlock = Verdict::Violated;
        else
            res.runtime_errors = Verdict::Violated;
    }
    if (res.exhausted) {
        for (Verdict* v : {&res.invariants, &res.deadlock, &res.runtime_errors})
            if (*v == Verdict::Holds)
                *v = Verdict::BoundExhausted;
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

std::string coverage_report(const CheckResult& r)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(1);
    size_t tt = 0, th = 0, ot = 0, oh = 0;
    for (const auto& c : r.coverage) {
        (c.transition ? tt : ot)++;
        if (c.count)
            (c.transition ? th : oh)++;
    }
    os << "transition coverage: " << th << "/" << tt << " (" << 100.0 * r.transition_coverage() << "%)";
    if (r.full_transition_coverage())
        os << " FULL COVERAGE";
    os << "\noperation coverage: " << oh << "/" << ot << " (" << 100.0 * r.operation_coverage() << "%)\n";
    for (const auto& c : r.coverage)
        os << "  " << (c.transition ? "transition " : "operation  ") << c.name << " fired " << c.count
           << (c.count ? "" : "  UNCOVERED") << '\n';
    return os.str();
}

std::string check_summary(const CheckResult& r)
{
    std::ostringstream os;
    os << "invariants: " << verdict_name(r.invariants) << '\n'
       << "deadlock: " << verdict_name(r.deadlock) << '\n'
       << "runtime errors: " << verdict_name(r.runtime_errors) << '\n'
       << "states: " << r.states << ", edges: " << r.edges << ", frontier peak: " << r.frontier_peak << ", time: "
       << std::fixed << std::setprecision(3) << r.seconds << "s\n";
    for (const auto& v : r.violations) {
        os << "violation (" << v.property << "): " << v.description << '\n'
           << "  configuration: " << v.configuration << '\n'
           << "  trace:\n";
        for (const auto& rec : v.trace) {
            os << "    t=" << rec.time << ' ' << rec.event;
            for (const auto& [n, val] : rec.bindings)
                os << ' ' << n << '=' << val;
            for (const auto& t : rec.transitions)
                os << " [" << t << ']';
            os << '\n';
        }
    }
    return os.str();
}

} // namespace coda
