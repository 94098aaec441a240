// coda: command-line front end.
//
// Exit status: 0 success, 1 property violation or divergence, 2 usage,
// input or I/O error.

#include "coda/checker.hpp"
#include "coda/eventb.hpp"
#include "coda/json_io.hpp"
#include "coda/loader.hpp"
#include "coda/oracle.hpp"
#include "coda/refine.hpp"
#include "coda/scenario.hpp"
#include "coda/server.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>
#include <limits>
#include <set>

using namespace coda;

namespace {

struct Bounds
{
    Time max_time = -1;
    size_t max_states = 0;
    int env_bound = -1;
    std::string policy;
    bool strict = false;
};

void add_bounds(CLI::App* cmd, Bounds& b, bool policy)
{
    cmd->add_option("--max-time", b.max_time, "time bound");
    cmd->add_option("--max-states", b.max_states, "state bound");
    cmd->add_option("--env-bound", b.env_bound, "environment events per cycle");
    cmd->add_flag("--strict-collisions", b.strict, "treat overwritten channel entries as errors");
    if (policy)
        cmd->add_option("--policy", b.policy, "lex | reverse | random:<seed>");
}

std::string stem(const std::string& path)
{
    return std::filesystem::path(path).stem().string();
}

void print_record(const EventRecord& r, const std::vector<std::string>* obs, const std::vector<std::string>& names)
{
    std::cout << "t=" << r.time << ' ' << r.event;
    for (const auto& [n, v] : r.bindings)
        std::cout << ' ' << n << '=' << v;
    for (const auto& t : r.transitions)
        std::cout << " [" << t << ']';
    for (const auto& s : r.sends)
        std::cout << " send " << s.connector << '=' << s.value << '@' << s.at;
    for (const auto& w : r.warnings)
        std::cout << " warning: " << w;
    if (obs)
        for (size_t i = 0; i < names.size(); ++i)
            std::cout << (i ? ", " : "  | ") << names[i] << '=' << (*obs)[i];
    std::cout << '\n';
}

int cmd_validate(const std::string& path)
{
    try {
        const Model m = load_model(path);
        size_t machines = 0, ops = 0;
        for (const auto& c : m.components) {
            machines += c.machines.size();
            ops += c.operations.size();
        }
        std::cout << "model " << m.name << ": " << m.components.size() << " components, " << m.connectors.size()
                  << " connectors, " << machines << " state machines, " << ops << " operations\n";
        if (m.refines) {
            Model mm = m;
            const Model a = load_abstract(mm);
            make_spec(mm, a);
            std::cout << "refines " << a.name << ": event and state maps complete\n";
        }
        return 0;
    } catch (const DiagnosticError& e) {
        std::cerr << e.what();
        return 1;
    }
}

int cmd_simulate(const std::string& mpath, const std::string& spath, const Bounds& b, const std::string& trace_out)
{
    const Model m = load_model(mpath);
    const Scenario sc = parse_scenario(read_file(spath), spath);
    KernelOptions ko;
    ko.env_bound = std::numeric_limits<int>::max();
    ko.strict_collisions = b.strict;
    const Kernel k(m, ko);
    RunOptions ro;
    if (!b.policy.empty())
        ro.policy = b.policy;
    if (b.max_time >= 0)
        ro.max_time = b.max_time;
    const RunResult res = run(k, sc, ro);
    for (size_t i = 0; i < res.records.size(); ++i)
        print_record(res.records[i], res.observations.empty() ? nullptr : &res.observations[i], sc.observe);
    if (!trace_out.empty()) {
        write_file(trace_out, trace_to_jsonl(m, res.records));
        std::cerr << "trace written to " << trace_out << '\n';
    }
    if (res.deadlocked) {
        std::cout << res.deadlock_reason << '\n';
        return sc.expect_deadlock ? 0 : 1;
    }
    if (sc.expect_deadlock) {
        std::cout << "expected deadlock did not occur\n";
        return 1;
    }
    return 0;
}

int cmd_check(const std::string& path, const Bounds& b, bool all, const std::string& out)
{
    const Model m = load_model(path);
    CheckConfig cfg;
    if (b.max_time >= 0)
        cfg.max_time = b.max_time;
    if (b.max_states)
        cfg.max_states = b.max_states;
    if (b.env_bound >= 0)
        cfg.env_bound = b.env_bound;
    cfg.strict_collisions = b.strict;
    cfg.all_violations = all;
    const CheckResult r = explore(m, cfg);
    std::cout << check_summary(r) << coverage_report(r);
    if (r.violations.empty())
        return 0;
    const std::string file = out.empty() ? stem(path) + ".cex.jsonl" : out;
    write_file(file, trace_to_jsonl(m, r.violations.front().trace));
    std::cout << "counterexample written to " << file << '\n';
    return 1;
}

int cmd_refine(const std::string& path, const Bounds& b, const std::string& out)
{
    Model m = load_model(path);
    const Model a = load_abstract(m);
    const RefinementSpec spec = make_spec(m, a);
    RefineConfig cfg;
    if (b.max_time >= 0)
        cfg.max_time = b.max_time;
    if (b.max_states)
        cfg.max_states = b.max_states;
    if (b.env_bound >= 0)
        cfg.env_bound = b.env_bound;
    const RefineResult r = check_refinement(spec, cfg);
    std::cout << refinement_report(spec, r);
    if (r.verdict != Verdict::Violated)
        return 0;
    const std::string file = out.empty() ? stem(path) + ".refine-cex.jsonl" : out;
    write_file(file, trace_to_jsonl(m, r.trace));
    std::cout << "counterexample written to " << file << '\n';
    return 1;
}

int cmd_emit(const std::string& path, const std::string& dir, bool plain)
{
    Model m = load_model(path);
    EmittedModel e;
    if (m.refines && !plain) {
        const Model a = load_abstract(m);
        e = emit_refinement(make_spec(m, a));
    } else {
        e = emit(m);
    }
    std::filesystem::create_directories(dir);
    for (const auto& f : write_emitted(e, dir))
        std::cout << f << '\n';
    return 0;
}

int cmd_record(const std::string& mpath, const std::string& spath, const std::string& out)
{
    const Model m = load_model(mpath);
    const Scenario sc = parse_scenario(read_file(spath), spath);
    const std::string text = golden_to_text(record(m, sc));
    if (out.empty())
        std::cout << text;
    else
        write_file(out, text);
    return 0;
}

int cmd_compare(const std::string& mpath, const std::string& spath, const std::string& gpath, bool accept,
                bool refinement, const std::vector<std::string>& projections, size_t min_matches)
{
    Model m = load_model(mpath);
    const Scenario sc = parse_scenario(read_file(spath), spath);
    const Golden g = golden_from_text(read_file(gpath));
    CompareOptions co;
    co.accept_model_change = accept;
    std::optional<Divergence> d;
    if (refinement) {
        const Model a = load_abstract(m);
        const RefinementSpec spec = make_spec(m, a);
        Projection p;
        p.min_matches = min_matches;
        for (const auto& s : projections) {
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw Error("Usage", "--project expects abstract=concrete, got `" + s + "`");
            p.observe[s.substr(0, eq)] = s.substr(eq + 1);
        }
        d = compare_refinement(spec, sc, g, p, co);
    } else {
        d = compare(m, sc, g, co);
    }
    if (!d) {
        std::cout << "match: " << g.records.size() << " records\n";
        return 0;
    }
    std::cout << d->str();
    return 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"coda: timed component models, simulation, checking and Event-B output"};
    app.require_subcommand(1);

    std::string model, scenario, golden, out;
    Bounds bounds;
    bool all = false, plain = false, accept = false, refinement = false;
    std::vector<std::string> projections;
    size_t min_matches = 1;
    ServiceOptions so;
    so.port = default_port();

    auto* validate = app.add_subcommand("validate", "parse and validate a model");
    validate->add_option("model", model)->required();

    auto* simulate = app.add_subcommand("simulate", "run a scenario and print the trace");
    simulate->add_option("model", model)->required();
    simulate->add_option("scenario", scenario)->required();
    simulate->add_option("-o,--trace", out, "write the trace as JSON lines");
    add_bounds(simulate, bounds, true);

    auto* check = app.add_subcommand("check", "bounded check of invariants, deadlock and runtime errors");
    check->add_option("model", model)->required();
    check->add_option("-o", out, "counterexample file (default <model>.cex.jsonl)");
    check->add_flag("--all", all, "collect every violation");
    add_bounds(check, bounds, false);

    auto* refine = app.add_subcommand("refine", "check a model against the model it refines");
    refine->add_option("model", model)->required();
    refine->add_option("-o", out, "counterexample file (default <model>.refine-cex.jsonl)");
    add_bounds(refine, bounds, false);

    auto* emitc = app.add_subcommand("emit", "write Event-B context and machine");
    emitc->add_option("model", model)->required();
    emitc->add_option("-o", out, "output directory")->required();
    emitc->add_flag("--plain", plain, "ignore the refines declaration");

    auto* recordc = app.add_subcommand("record", "record a golden trace");
    recordc->add_option("model", model)->required();
    recordc->add_option("scenario", scenario)->required();
    recordc->add_option("-o", out, "golden file (default stdout)");

    auto* comparec = app.add_subcommand("compare", "compare a run with a golden trace");
    comparec->add_option("model", model)->required();
    comparec->add_option("scenario", scenario)->required();
    comparec->add_option("golden", golden)->required();
    comparec->add_flag("--accept-model-change", accept, "compare even though the model changed since recording");
    comparec->add_flag("--refinement", refinement, "project onto the refined model's golden");
    comparec->add_option("--project", projections, "abstract=concrete observable mapping");
    comparec->add_option("--min-matches", min_matches, "events that must survive the projection");

    auto* servec = app.add_subcommand("serve", "run the HTTP session service");
    servec->add_option("--port", so.port, "port (default $CODA_PORT or 8787)");
    servec->add_option("--host", so.host, "bind address");
    servec->add_option("--undo-depth", so.undo_depth, "undo history per session");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*validate)
            return cmd_validate(model);
        if (*simulate)
            return cmd_simulate(model, scenario, bounds, out);
        if (*check)
            return cmd_check(model, bounds, all, out);
        if (*refine)
            return cmd_refine(model, bounds, out);
        if (*emitc)
            return cmd_emit(model, out, plain);
        if (*recordc)
            return cmd_record(model, scenario, out);
        if (*comparec)
            return cmd_compare(model, scenario, golden, accept, refinement, projections, min_matches);
        if (*servec) {
            serve(so);
            return 0;
        }
    } catch (const DiagnosticError& e) {
        std::cerr << e.what();
        return 2;
    } catch (const Error& e) {
        // Failures of the model under test, as opposed to bad input.
        static const std::set<std::string> violations = {
            "DeadlockReached", "Livelock",        "MethodDepthExceeded", "Overflow",           "RangeError",
            "RecvUndefined",   "SendCollision",   "ScheduleUnsatisfiable", "VariantNotDecreased", "VacuousProjection"};
        std::cerr << e.code() << ": " << e.what() << '\n';
        return violations.count(e.code()) ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
