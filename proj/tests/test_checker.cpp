#include "doctest.h"

#include "coda/checker.hpp"
#include "coda/scenario.hpp"
#include "support.hpp"

#include <map>

using namespace coda;

namespace {

std::map<std::string, bool> covered(const CheckResult& r)
{
    std::map<std::string, bool> out;
    for (const auto& c : r.coverage)
        out[c.name] = c.count > 0;
    return out;
}

} // namespace

TEST_CASE("flawed door interlock is found and the counterexample replays")
{
    Model m = test::load("models/wm2_flawed.coda");
    CheckConfig cfg;
    cfg.max_time = 30;
    const CheckResult r = explore(m, cfg);
    REQUIRE(r.invariants == Verdict::Violated);
    REQUIRE_FALSE(r.violations.empty());
    const Violation& v = r.violations.front();
    CHECK(v.property == "invariant");
    CHECK(v.description.find("DOORLOCKED") != std::string::npos);
    CHECK(v.configuration.find("WM.wmsm=INPROGRESS") != std::string::npos);

    KernelOptions ko;
    ko.env_bound = cfg.env_bound;
    const Kernel k(m, ko);
    const RuntimeState end = replay(k, v.trace);
    CHECK_FALSE(k.violated_invariants(end).empty());
    CHECK(configuration_text(k, end) == v.configuration);
}

TEST_CASE("door interlock holds with full transition coverage")
{
    Model m = test::load("models/wm2.coda");
    CheckConfig cfg;
    cfg.max_time = 30;
    const CheckResult r = explore(m, cfg);
    CHECK(r.ok());
    CHECK(r.invariants == Verdict::Holds);
    CHECK(r.deadlock == Verdict::Holds);
    CHECK(r.runtime_errors == Verdict::Holds);
    CHECK(r.full_transition_coverage());
    CHECK(coverage_report(r).find("FULL COVERAGE") != std::string::npos);
}

TEST_CASE("single washing machine covers its 7 transitions within 20 ticks")
{
    Model m = test::load("models/wm0.coda");
    CheckConfig cfg;
    cfg.max_time = 20;
    const CheckResult r = explore(m, cfg);
    CHECK(r.ok());
    size_t transitions = 0;
    for (const auto& c : r.coverage)
        if (c.transition) {
            ++transitions;
            CHECK(c.count > 0);
        }
    CHECK(transitions == 7);
}

TEST_CASE("washing machine with control panel covers every transition")
{
    Model m = test::load("models/wm1.coda");
    const CheckResult r = explore(m, {});
    CHECK(r.ok());
    size_t transitions = 0;
    for (const auto& c : r.coverage)
        if (c.transition) {
            ++transitions;
            CHECK(c.count > 0);
        }
    CHECK(transitions == 8);
    CHECK(r.transition_coverage() == doctest::Approx(1.0));
}

TEST_CASE("transition that can never fire is reported uncovered")
{
    Model m = load_model_text(R"(model dead
component A {
    var n : NAT = 0
    statemachine s async {
        initial X
        state X
        state Y
        transition go : X -> Y links go
        transition never : Y -> X links back {
            guard FALSE
        }
    }
    operation go kind E
    operation back kind E
}
)");
    const CheckResult r = explore(m, {});
    const auto cov = covered(r);
    CHECK(cov.at("A.s.go"));
    CHECK_FALSE(cov.at("A.s.never"));
    CHECK(r.transition_coverage() == doctest::Approx(0.5));
    CHECK_FALSE(r.full_transition_coverage());
    CHECK(coverage_report(r).find("FULL COVERAGE") == std::string::npos);
}

TEST_CASE("deadlock and runtime errors are reported")
{
    Model m = load_model_text(R"(model stuck
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
    const CheckResult r = explore(m, {});
    CHECK(r.deadlock == Verdict::Violated);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].property == "deadlock");
    CHECK(r.violations[0].trace.back().event == "tick");

    Model bad = load_model_text(R"(model underflow
component A {
    var n : NAT = 0
    operation dec kind E {
        action n := n - 1
    }
}
)");
    const CheckResult rb = explore(bad, {});
    CHECK(rb.runtime_errors == Verdict::Violated);
}

// Absolute keys keep the whole channel history, so the bounds stay small.
TEST_CASE("pruned and absolute exploration agree")
{
    int compared = 0;
    auto agree = [&](const Model& m, Time max_time) {
        CheckConfig a;
        a.max_time = max_time;
        a.env_bound = 1;
        CheckConfig b = a;
        b.canonical = false;
        b.max_states = 100000;
        const CheckResult rb = explore(m, b);
        if (rb.exhausted)
            return;
        ++compared;
        const CheckResult ra = explore(m, a);
        CHECK(ra.invariants == rb.invariants);
        CHECK(ra.deadlock == rb.deadlock);
        CHECK(ra.runtime_errors == rb.runtime_errors);
        CHECK(covered(ra) == covered(rb));
        CHECK(ra.states <= rb.states);
    };
    for (const std::string name : {"wm0", "wm1", "io0", "io1"}) {
        CAPTURE(name);
        agree(test::load("models/" + name + ".coda"), 5);
    }
    for (int i = 0; i < 40; ++i) {
        test::ModelGen gen(900 + i);
        CAPTURE(i);
        agree(load_model_text(gen.generate("g")), 4);
    }
    CHECK(compared >= 30);
}

TEST_CASE("exploration is deterministic")
{
    Model m = test::load("models/wm2_flawed.coda");
    CheckConfig cfg;
    cfg.max_time = 20;
    const CheckResult a = explore(m, cfg);
    const CheckResult b = explore(m, cfg);
    CHECK(a.states == b.states);
    CHECK(a.edges == b.edges);
    REQUIRE(a.violations.size() == b.violations.size());
    CHECK(a.violations[0].trace == b.violations[0].trace);
}

TEST_CASE("state bound yields bound-exhausted")
{
    Model m = test::load("models/wm2.coda");
    CheckConfig cfg;
    cfg.max_time = 30;
    cfg.max_states = 100;
    const CheckResult r = explore(m, cfg);
    CHECK(r.exhausted);
    CHECK(r.invariants == Verdict::BoundExhausted);
    CHECK(std::string(verdict_name(r.invariants)) == "bound-exhausted");
}
