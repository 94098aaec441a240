#include "coda/oracle.hpp"

#include "coda/parser.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <sstream>

namespace coda {

namespace {

std::string record_line(size_t i, const GoldenRecord& r)
{
    std::string out = std::to_string(i) + ' ' + std::to_string(r.time) + ' ' + r.event + " |";
    for (const auto& v : r.values)
        out += ' ' + v;
    return out;
}

std::vector<std::string> words(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string w; in >> w;)
        out.push_back(w);
    return out;
}

bool parse_number(const std::string& s, long long& out)
{
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

std::string hex(std::uint64_t h)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Kernel make_kernel(const Model& m)
{
    KernelOptions ko;
    ko.env_bound = std::numeric_limits<int>::max();
    return Kernel(m, ko);
}

void check_observables(const Kernel& k, const std::vector<std::string>& observe)
{
    const RuntimeState s = k.init();
    for (const auto& o : observe)
        if (!k.observe(s, o))
            throw Error("FormatError", "observable `" + o + "` in the golden file is not a variable, state machine or "
                                       "connector of model `" + k.model().name + "`");
}

Divergence divergence_at(size_t i, const std::vector<GoldenRecord>& expected, const std::vector<GoldenRecord>& actual)
{
    Divergence d;
    d.index = i;
    if (i < expected.size())
        d.expected = expected[i];
    if (i < actual.size())
        d.actual = actual[i];
    d.time = d.expected ? d.expected->time : d.actual ? d.actual->time : 0;
    const size_t lo = i >= 3 ? i - 3 : 0;
    for (size_t j = lo; j <= i + 3; ++j) {
        if (j < expected.size())
            d.context.push_back(std::string(j == i ? "> " : "  ") + "expected " + record_line(j, expected[j]));
        if (j < actual.size())
            d.context.push_back(std::string(j == i ? "> " : "  ") + "actual   " + record_line(j, actual[j]));
    }
    return d;
}

std::optional<Divergence> diff(const Golden& g, const std::vector<GoldenRecord>& actual, std::optional<Time> deadlock)
{
    const auto& exp = g.records;
    const size_t n = std::min(exp.size(), actual.size());
    for (size_t i = 0; i < n; ++i)
        if (!(exp[i] == actual[i]))
            return divergence_at(i, exp, actual);
    if (exp.size() != actual.size())
        return divergence_at(n, exp, actual);
    if (g.deadlock != deadlock) {
        Divergence d = divergence_at(n, exp, actual);
        d.time = deadlock.value_or(g.deadlock.value_or(0));
        d.context.push_back(g.deadlock ? "expected deadlock at " + std::to_string(*g.deadlock) : "expected no deadlock");
        d.context.push_back(deadlock ? "actual deadlock at " + std::to_string(*deadlock) : "actual: no deadlock");
        return d;
    }
    return std::nullopt;
}

void check_header(const Golden& g, const std::string& model_name, const std::string& mhash, const CompareOptions& opts)
{
    if (g.semantics != kSemantics)
        throw Error("StaleGolden", "golden was recorded with semantics `" + g.semantics + "`, the kernel implements `" +
                                       kSemantics + "`");
    if (opts.accept_model_change)
        return;
    if (g.model != model_name)
        throw Error("StaleGolden", "golden is for model `" + g.model + "`, not `" + model_name + "`");
    if (g.model_hash != mhash)
        throw Error("StaleGolden", "model `" + model_name + "` changed since the golden was recorded (hash " +
                                       g.model_hash + ", now " + mhash + ")");
}

} // namespace

std::string Divergence::str() const
{
    std::ostringstream os;
    os << "divergence at record " << index << " (time " << time << ")\n";
    os << "  expected: " << (expected ? record_line(index, *expected) : std::string("<end of golden>")) << '\n';
    os << "  actual:   " << (actual ? record_line(index, *actual) : std::string("<end of run>")) << '\n';
    os << "context:\n";
    for (const auto& c : context)
        os << "  " << c << '\n';
    return os.str();
}

std::string golden_to_text(const Golden& g)
{
    std::string out = "coda-golden 1\n";
    out += "model " + g.model + '\n';
    out += "model-hash " + g.model_hash + '\n';
    out += "scenario-hash " + g.scenario_hash + '\n';
    out += "semantics " + g.semantics + '\n';
    out += "policy " + g.policy + '\n';
    out += "observe";
    for (const auto& o : g.observe)
        out += ' ' + o;
    out += '\n';
    out += "records " + std::to_string(g.records.size()) + '\n';
    for (size_t i = 0; i < g.records.size(); ++i)
        out += record_line(i, g.records[i]) + '\n';
    if (g.deadlock)
        out += "deadlock " + std::to_string(*g.deadlock) + '\n';
    out += "end\n";
    return out;
}

Golden golden_from_text(const std::string& text)
{
    std::vector<std::string> lines;
    {
        std::string cur;
        for (char c : text) {
            if (c == '\r')
                throw Error("FormatError", "golden line " + std::to_string(lines.size() + 1) + ": CR line ending");
            if (c == '\n') {
                lines.push_back(std::move(cur));
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!cur.empty())
            throw Error("FormatError", "golden file does not end with a newline");
    }
    size_t ln = 0;
    auto fail = [&](const std::string& msg) -> Error {
        return Error("FormatError", "golden line " + std::to_string(ln + 1) + ": " + msg);
    };
    auto header = [&](const std::string& key) {
        if (ln >= lines.size())
            throw fail("missing `" + key + "`");
        const std::string& l = lines[ln];
        if (l != key && l.rfind(key + ' ', 0) != 0)
            throw fail("expected `" + key + "`");
        std::string rest = l.size() > key.size() ? l.substr(key.size() + 1) : std::string();
        ++ln;
        return rest;
    };

    Golden g;
    if (header("coda-golden") != "1")
        throw Error("FormatError", "unsupported golden version");
    g.model = header("model");
    g.model_hash = header("model-hash");
    g.scenario_hash = header("scenario-hash");
    g.semantics = header("semantics");
    g.policy = header("policy");
    g.observe = words(header("observe"));
    long long count = 0;
    if (!parse_number(header("records"), count) || count < 0)
        throw Error("FormatError", "golden line " + std::to_string(ln) + ": bad record count");

    for (long long i = 0; i < count; ++i, ++ln) {
        if (ln >= lines.size())
            throw fail("expected " + std::to_string(count) + " records, found " + std::to_string(i));
        const std::string& l = lines[ln];
        const auto bar = l.find(" |");
        if (bar == std::string::npos)
            throw fail("record without ` |`");
        auto head = words(l.substr(0, bar));
        long long idx = 0, t = 0;
        if (head.size() < 3 || !parse_number(head[0], idx) || !parse_number(head[1], t))
            throw fail("malformed record");
        if (idx != i)
            throw fail("record index " + head[0] + ", expected " + std::to_string(i));
        GoldenRecord r;
        r.time = t;
        r.event = head[2];
        for (size_t j = 3; j < head.size(); ++j) {
            if (head[j].find('=') == std::string::npos)
                throw fail("binding `" + head[j] + "` is not param=value");
            r.event += ' ' + head[j];
        }
        r.values = words(l.substr(bar + 2));
        if (r.values.size() != g.observe.size())
            throw fail(std::to_string(r.values.size()) + " values for " + std::to_string(g.observe.size()) +
                       " observables");
        g.records.push_back(std::move(r));
    }
    if (ln < lines.size() && lines[ln].rfind("deadlock ", 0) == 0) {
        long long t = 0;
        if (!parse_number(lines[ln].substr(9), t))
            throw fail("bad deadlock time");
        g.deadlock = t;
        ++ln;
    }
    if (ln >= lines.size() || lines[ln] != "end")
        throw fail("expected `end`");
    if (++ln != lines.size())
        throw fail("content after `end`");
    return g;
}

std::string scenario_hash(const Scenario& sc)
{
    std::ostringstream os;
    os << "max-time " << sc.max_time << "\npolicy " << sc.policy << "\nobserve";
    for (const auto& o : sc.observe)
        os << ' ' << o;
    os << "\nexpect-deadlock " << sc.expect_deadlock << '\n';
    for (const auto& f : sc.fires) {
        os << "at " << f.at << " fire " << f.event;
        for (const auto& [n, v] : f.bindings)
            os << ' ' << n << '=' << v;
        os << '\n';
    }
    return hex(fnv1a64(os.str()));
}

GoldenRecord golden_record(const EventRecord& r, std::vector<std::string> values)
{
    GoldenRecord g;
    g.time = r.time;
    g.event = r.event;
    for (const auto& [n, v] : r.bindings)
        g.event += ' ' + n + '=' + v;
    g.values = std::move(values);
    return g;
}

namespace {

std::vector<GoldenRecord> to_records(const RunResult& res)
{
    std::vector<GoldenRecord> out;
    out.reserve(res.records.size());
    for (size_t i = 0; i < res.records.size(); ++i)
        out.push_back(golden_record(res.records[i], res.observations.empty() ? std::vector<std::string>{}
                                                                             : res.observations[i]));
    return out;
}

} // namespace

Golden record(const Model& m, const Scenario& sc, const RunOptions& opts)
{
    const Kernel k = make_kernel(m);
    const RunResult res = run(k, sc, opts);
    if (res.deadlocked && !sc.expect_deadlock)
        throw Error("DeadlockReached", res.deadlock_reason);
    Golden g;
    g.model = m.name;
    g.model_hash = model_hash(m);
    g.scenario_hash = scenario_hash(sc);
    g.policy = opts.policy.value_or(sc.policy);
    g.observe = sc.observe;
    g.records = to_records(res);
    if (res.deadlocked)
        g.deadlock = res.final_state.now;
    return g;
}

Golden golden_from_trace(const Model& m, const std::vector<EventRecord>& trace, const std::vector<std::string>& observe,
                         const Scenario* sc)
{
    const Kernel k = make_kernel(m);
    check_observables(k, observe);
    Golden g;
    g.model = m.name;
    g.model_hash = model_hash(m);
    g.observe = observe;
    if (sc) {
        g.scenario_hash = scenario_hash(*sc);
        g.policy = sc->policy;
    } else {
        Scenario synth;
        synth.policy = g.policy = "manual";
        synth.observe = observe;
        synth.max_time = trace.empty() ? 0 : trace.back().time;
        for (const auto& r : trace)
            if (r.kind == "E")
                synth.fires.push_back({r.time, r.event, {r.bindings.begin(), r.bindings.end()}, 0});
        g.scenario_hash = scenario_hash(synth);
    }
    std::vector<EventRecord> prefix;
    for (const auto& r : trace) {
        prefix.push_back(r);
        const RuntimeState s = replay(k, prefix);
        std::vector<std::string> values;
        for (const auto& o : observe)
            values.push_back(*k.observe(s, o));
        g.records.push_back(golden_record(r, std::move(values)));
    }
    return g;
}

std::optional<Divergence> compare(const Model& m, const Scenario& sc, const Golden& g, const CompareOptions& opts)
{
    check_header(g, m.name, model_hash(m), opts);
    const std::string sh = scenario_hash(sc);
    if (g.scenario_hash != sh)
        throw Error("StaleGolden", "scenario changed since the golden was recorded (hash " + g.scenario_hash + ", now " +
                                       sh + ")");
    const Kernel k = make_kernel(m);
    check_observables(k, g.observe);
    Scenario run_sc = sc;
    run_sc.observe = g.observe;
    RunOptions ro;
    ro.policy = g.policy;
    const RunResult res = run(k, run_sc, ro);
    return diff(g, to_records(res), res.deadlocked ? std::optional<Time>(res.final_state.now) : std::nullopt);
}

std::optional<Divergence> compare_refinement(const RefinementSpec& spec, const Scenario& sc, const Golden& g,
                                             const Projection& proj, const CompareOptions& opts)
{
    const Model& cm = *spec.concrete;
    const Model& am = *spec.abstract;
    check_header(g, am.name, model_hash(am), opts);
    const Kernel ck = make_kernel(cm);
    const Kernel ak = make_kernel(am);
    check_observables(ak, g.observe);

    // Each abstract observable becomes a concrete one plus, for state
    // machines, the concrete global machine whose leaf is mapped.
    struct Source
    {
        std::string concrete;
        int machine = -1; // concrete global machine, -1 for raw values
    };
    std::vector<Source> sources;
    const RuntimeState cinit = ck.init();
    for (const auto& o : g.observe) {
        if (auto it = proj.observe.find(o); it != proj.observe.end()) {
            if (!ck.observe(cinit, it->second))
                throw Error("UnmappedObservation", "projection maps `" + o + "` to `" + it->second +
                                                       "`, which model `" + cm.name + "` does not have");
            sources.push_back({it->second, -1});
            continue;
        }
        const auto dot = o.find('.');
        int ag = -1;
        if (dot != std::string::npos) {
            const int ac = am.find_component(o.substr(0, dot));
            const int ami = ac < 0 ? -1 : am.components[ac].find_machine(o.substr(dot + 1));
            if (ami >= 0)
                ag = ak.global_machine(ac, ami);
        }
        if (ag >= 0) {
            auto it = std::find(spec.machine_map.begin(), spec.machine_map.end(), ag);
            if (it == spec.machine_map.end())
                throw Error("UnmappedObservation", "no state machine of `" + cm.name + "` refines `" + o + "`");
            const int cg = static_cast<int>(it - spec.machine_map.begin());
            sources.push_back({{}, cg});
            continue;
        }
        if (!ck.observe(cinit, o))
            throw Error("UnmappedObservation", "`" + o + "` has no counterpart in `" + cm.name +
                                                   "`; add it to the projection map");
        sources.push_back({o, -1});
    }

    Scenario run_sc = sc;
    run_sc.observe.clear();
    for (const auto& src : sources)
        run_sc.observe.push_back(src.machine < 0 ? src.concrete
                                                 : cm.components[ck.comp_of_machine(src.machine)].name + "." +
                                                       ck.machine_of(src.machine).name);
    RunOptions ro;
    ro.policy = g.policy;

    const RunResult res = run(ck, run_sc, ro);
    std::vector<GoldenRecord> projected;
    size_t matches = 0;
    for (size_t i = 0; i < res.records.size(); ++i) {
        const auto& rec = res.records[i];
        std::string target = "tick";
        if (rec.event != "tick") {
            auto it = spec.event_map.find(rec.event);
            if (it == spec.event_map.end())
                throw Error("UnmappedObservation", "event `" + rec.event + "` is not in the event map");
            if (it->second == "new")
                continue;
            target = it->second;
            ++matches;
        }
        EventRecord renamed;
        renamed.event = target;
        renamed.time = rec.time;
        // Keep only the parameters the abstract event declares.
        const auto dot = target.find('.');
        if (dot != std::string::npos) {
            const int ac = am.find_component(target.substr(0, dot));
            const int aop = ac < 0 ? -1 : am.components[ac].find_op(target.substr(dot + 1));
            if (aop >= 0)
                for (const auto& b : rec.bindings)
                    for (const auto& p : am.components[ac].operations[aop].params)
                        if (p.name == b.first)
                            renamed.bindings.push_back(b);
        }
        std::vector<std::string> values;
        for (size_t j = 0; j < sources.size(); ++j) {
            const auto& src = sources[j];
            const std::string& seen = res.observations[i][j];
            if (src.machine < 0) {
                values.push_back(seen);
                continue;
            }
            const auto& states = ck.machine_of(src.machine).states;
            const auto leaf = std::find_if(states.begin(), states.end(), [&](const auto& st) { return st.name == seen; });
            const int img = leaf == states.end() ? -1 : spec.state_map[src.machine][leaf - states.begin()];
            const int ag = spec.machine_map[src.machine];
            values.push_back(img < 0 ? std::string("-") : ak.machine_of(ag).states[img].name);
        }
        projected.push_back(golden_record(renamed, std::move(values)));
    }
    if (matches < proj.min_matches)
        throw Error("VacuousProjection", "only " + std::to_string(matches) + " concrete events survive the projection; " +
                                             std::to_string(proj.min_matches) + " required");
    return diff(g, projected, res.deadlocked ? std::optional<Time>(res.final_state.now) : std::nullopt);
}

} // namespace coda
