#include "doctest.h"

#include "coda/oracle.hpp"
#include "support.hpp"

#include <functional>

using namespace coda;

namespace {

struct Case
{
    const char* model;
    const char* scenario;
};

const Case kCases[] = {
    {"wm0", "wm0_cycle"},     {"wm1", "wm1_cycle"},  {"wm2", "wm2_cycle"},  {"wm3", "wm3_normal"},
    {"wm3", "wm3_door_open"}, {"wm4", "wm4_quick"},  {"wm4", "wm4_normal"}, {"io0", "io0_powerup"},
    {"io1", "io1_powerup"},
};

Scenario scenario(const std::string& name)
{
    const std::string p = test::path("scenarios/" + name + ".scn");
    return parse_scenario(read_file(p), p);
}

Golden golden(const std::string& name)
{
    return golden_from_text(read_file(test::path("golden/" + name + ".golden")));
}

std::string code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return {};
}

std::string replace(std::string s, const std::string& from, const std::string& to)
{
    for (auto p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size()))
        s.replace(p, from.size(), to);
    return s;
}

} // namespace

TEST_CASE("shipped goldens match")
{
    for (const auto& c : kCases) {
        CAPTURE(c.scenario);
        const Model m = test::load(std::string("models/") + c.model + ".coda");
        const auto d = compare(m, scenario(c.scenario), golden(c.scenario));
        CHECK_FALSE(d.has_value());
        if (d)
            MESSAGE(d->str());
    }
}

TEST_CASE("recording is byte-identical")
{
    for (const auto& c : kCases) {
        CAPTURE(c.scenario);
        const Model m = test::load(std::string("models/") + c.model + ".coda");
        const std::string a = golden_to_text(record(m, scenario(c.scenario)));
        CHECK(a == golden_to_text(record(m, scenario(c.scenario))));
        CHECK(a == read_file(test::path(std::string("golden/") + c.scenario + ".golden")));
        CHECK(a.find('\r') == std::string::npos);
    }
}

TEST_CASE("ten ticks of a model with no environment input")
{
    const Model m = load_model_text("model minimal\ncomponent C {\n    var n : NAT = 0\n}\n");
    const Scenario sc = parse_scenario("max-time 10\nobserve C.n\n");
    const Golden g = record(m, sc);
    REQUIRE(g.records.size() == 10);
    for (size_t i = 0; i < 10; ++i) {
        CHECK(g.records[i].time == static_cast<Time>(i));
        CHECK(g.records[i].event == "tick");
        CHECK(g.records[i].values == std::vector<std::string>{"0"});
    }
    CHECK_FALSE(compare(m, sc, g).has_value());
    const std::string text = golden_to_text(g);
    CHECK(text.rfind("coda-golden 1\nmodel minimal\n", 0) == 0);
    CHECK(text.find("semantics coda-kernel/1\n") != std::string::npos);
    CHECK(text.ends_with("9 9 tick | 0\nend\n"));
}

TEST_CASE("control panel golden reports RUNNING")
{
    const Golden g = golden("wm1_cycle");
    REQUIRE(g.observe == std::vector<std::string>{"WM.wmsm", "WMSTATE", "CP.display"});
    bool running = false;
    for (const auto& r : g.records)
        running |= r.values[1] == "RUNNING" && r.values[2] == "RUNNING";
    CHECK(running);
}

TEST_CASE("text round-trip and format errors")
{
    for (const auto& c : kCases) {
        const std::string text = read_file(test::path(std::string("golden/") + c.scenario + ".golden"));
        CHECK(golden_to_text(golden_from_text(text)) == text);
    }
    const std::string text = read_file(test::path("golden/wm1_cycle.golden"));
    CHECK(code_of([&] { golden_from_text(replace(text, "records 20", "records 21")); }) == "FormatError");
    CHECK(code_of([&] { golden_from_text(replace(text, "coda-golden 1", "coda-golden 9")); }) == "FormatError");
    CHECK(code_of([&] { golden_from_text(replace(text, "| IDLE - WAITING", "| IDLE")); }) == "FormatError");
    try {
        golden_from_text(replace(text, "3 1 CP.Running |", "3 1 CP.Running"));
        FAIL("expected FormatError");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 12") != std::string::npos);
    }
}

TEST_CASE("a mutated record is reported at its index")
{
    const Model m = test::load("models/wm1.coda");
    const Scenario sc = scenario("wm1_cycle");
    const Golden good = golden("wm1_cycle");
    for (size_t i : {size_t{0}, size_t{4}, size_t{15}, good.records.size() - 1}) {
        Golden g = good;
        g.records[i].values[0] = "SPINNING";
        if (good.records[i].values[0] == "SPINNING")
            g.records[i].values[0] = "IDLE";
        const auto d = compare(m, sc, g);
        REQUIRE(d.has_value());
        CHECK(d->index == i);
        CHECK(d->time == good.records[i].time);
        CHECK(d->str().find("> ") != std::string::npos);
    }
    Golden shorter = good;
    shorter.records.pop_back();
    const auto d = compare(m, sc, shorter);
    REQUIRE(d.has_value());
    CHECK(d->index == shorter.records.size());
    CHECK_FALSE(d->expected.has_value());
}

TEST_CASE("golden goes stale when the model or scenario changes")
{
    const std::string src = read_file(test::path("models/wm1.coda"));
    const Golden g = golden("wm1_cycle");
    const Scenario sc = scenario("wm1_cycle");

    // a stronger guard keeps WM from reporting WAITING at start-up
    const Model stronger = load_model_text(replace(src, "guard waitingPending > 0", "guard waitingPending > 1"),
                                           test::path("models/wm1.coda"));
    CHECK(code_of([&] { compare(stronger, sc, g); }) == "StaleGolden");
    CompareOptions accept;
    accept.accept_model_change = true;
    const auto d = compare(stronger, sc, g, accept);
    REQUIRE(d.has_value());
    CHECK(d->index == 1);
    REQUIRE(d->expected);
    CHECK(d->expected->event == "WM.sendWaiting");

    // comments and layout do not matter, the schedule does
    const Model m = test::load("models/wm1.coda");
    const Scenario commented = parse_scenario("// again\n\n" + sc.text);
    CHECK_FALSE(compare(m, commented, g).has_value());
    const Scenario moved = parse_scenario(replace(sc.text, "at 5 fire WM.rinse", "at 4 fire WM.rinse"));
    CHECK(code_of([&] { compare(m, moved, g); }) == "StaleGolden");

    Golden other = g;
    other.semantics = "coda-kernel/0";
    CHECK(code_of([&] { compare(m, sc, other, accept); }) == "StaleGolden");
}

TEST_CASE("renamed variable is a format error naming the observable")
{
    const std::string src = read_file(test::path("models/wm1.coda"));
    const Model renamed = load_model_text(replace(src, "display", "shown"), test::path("models/wm1.coda"));
    CompareOptions accept;
    accept.accept_model_change = true;
    try {
        compare(renamed, scenario("wm1_cycle"), golden("wm1_cycle"), accept);
        FAIL("expected FormatError");
    } catch (const Error& e) {
        CHECK(std::string(e.code()) == "FormatError");
        CHECK(std::string(e.what()).find("CP.display") != std::string::npos);
    }
}

TEST_CASE("refined models reproduce the abstract golden")
{
    for (const char* level : {"wm1", "wm2"}) {
        CAPTURE(level);
        Model m = test::load(std::string("models/") + level + ".coda");
        const Model a = load_abstract(m);
        const RefinementSpec spec = make_spec(m, a);
        const std::string base = level == std::string("wm1") ? "wm0_cycle" : "wm1_cycle";
        const auto d = compare_refinement(spec, scenario(std::string(level) + "_cycle"), golden(base));
        CHECK_FALSE(d.has_value());
        if (d)
            MESSAGE(d->str());
    }
}

TEST_CASE("projection failures")
{
    Model m = test::load("models/wm1.coda");
    const Model a = load_abstract(m);
    const RefinementSpec spec = make_spec(m, a);
    const Scenario sc = scenario("wm1_cycle");
    const Golden g = golden("wm0_cycle");

    Projection strict;
    strict.min_matches = 1000;
    CHECK(code_of([&] { compare_refinement(spec, sc, g, strict); }) == "VacuousProjection");

    Projection wrong;
    wrong.observe["WM.wmsm"] = "WM.nothing";
    CHECK(code_of([&] { compare_refinement(spec, sc, g, wrong); }) == "UnmappedObservation");

    // a variable the abstract model does not have
    Golden extra = g;
    extra.observe.push_back("WM.waitingPending");
    for (auto& r : extra.records)
        r.values.push_back("0");
    CHECK(code_of([&] { compare_refinement(spec, sc, extra); }) == "FormatError");
}

TEST_CASE("mode bug diverges at the finish step")
{
    Model m = test::load("tests/fixtures/mode_bug.coda");
    const Model a = load_abstract(m);
    const RefinementSpec spec = make_spec(m, a);
    const auto d = compare_refinement(spec, scenario("wm1_cycle"), golden("wm0_cycle"));
    REQUIRE(d.has_value());
    REQUIRE(d->expected);
    REQUIRE(d->actual);
    CHECK(d->expected->event == "WM.finish");
    CHECK(d->time == 8);
    CHECK(d->expected->values[0] == "IDLE");
    CHECK(d->actual->values[0] == "WASHING");
}

TEST_CASE("session-style golden from a trace")
{
    const Model m = test::load("models/wm1.coda");
    const Scenario sc = scenario("wm1_cycle");
    const RunResult r = run(Kernel(m, {std::numeric_limits<int>::max()}), sc);
    const Golden with = golden_from_trace(m, r.records, sc.observe, &sc);
    CHECK(golden_to_text(with) == read_file(test::path("golden/wm1_cycle.golden")));
    const Golden manual = golden_from_trace(m, r.records, sc.observe);
    CHECK(manual.policy == "manual");
    CHECK(manual.records == with.records);
}

TEST_CASE("expected deadlock is recorded")
{
    const Model m = load_model_text(R"(model stuck
component A {
    var go : BOOL = FALSE
    operation arm kind E {
        guard go = FALSE
        action go := TRUE
        action self_wake(delay 1)
    }
    operation respond kind S {
        guard go = FALSE
    }
}
)");
    CHECK(code_of([&] { record(m, parse_scenario("max-time 5\nat 0 fire A.arm\n")); }) == "DeadlockReached");
    const Scenario sc = parse_scenario("max-time 5\nat 0 fire A.arm\nexpect deadlock\nobserve A.go\n");
    const Golden g = record(m, sc);
    REQUIRE(g.deadlock.has_value());
    CHECK(*g.deadlock == 1);
    CHECK(golden_to_text(g).find("deadlock 1\nend\n") != std::string::npos);
    CHECK_FALSE(compare(m, sc, g).has_value());
    Golden no = g;
    no.deadlock.reset();
    CHECK(compare(m, sc, no).has_value());
}
