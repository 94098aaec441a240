#include "doctest.h"

#include "coda/refine.hpp"
#include "coda/scenario.hpp"
#include "support.hpp"

#include <functional>

using namespace coda;

namespace {

RefineResult refine(const std::string& rel, RefineConfig cfg = {})
{
    Model m = test::load(rel);
    const Model a = load_abstract(m);
    return check_refinement(make_spec(m, a), cfg);
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

} // namespace

TEST_CASE("every model refines itself")
{
    for (const auto& name : test::shipped_models()) {
        Model m = test::load("models/" + name + ".coda");
        RefineConfig cfg;
        cfg.max_time = 10;
        const RefineResult r = check_refinement(identity_spec(m), cfg);
        CAPTURE(name);
        CHECK(r.verdict == Verdict::Holds);
    }
}

TEST_CASE("washing machine chain")
{
    for (const char* name : {"wm1", "wm2", "wm3"}) {
        const RefineResult r = refine(std::string("models/") + name + ".coda");
        CAPTURE(name);
        CHECK(r.verdict == Verdict::Holds);
        CHECK(r.reason.empty());
    }
    CHECK(refine("models/wm4.coda").verdict == Verdict::Holds);
}

TEST_CASE("serial IO refines the abstract power-up")
{
    RefineConfig cfg;
    cfg.max_time = 80;
    CHECK(refine("models/io1.coda", cfg).verdict == Verdict::Holds);
}

TEST_CASE("broken gluing gives a replayable counterexample")
{
    Model m = test::load("tests/fixtures/broken_gluing.coda");
    const Model a = load_abstract(m);
    const RefinementSpec spec = make_spec(m, a);
    const RefineResult r = check_refinement(spec);
    REQUIRE(r.verdict == Verdict::Violated);
    CHECK(r.reason.find("CP.Running") != std::string::npos);
    REQUIRE_FALSE(r.trace.empty());
    CHECK(r.trace.back().event == "CP.Running");
    CHECK(r.abstract_steps.size() == r.trace.size());
    const Kernel k(m);
    CHECK_NOTHROW(replay(k, r.trace));
    CHECK(refinement_report(spec, r).find("violated") != std::string::npos);
}

TEST_CASE("gluing that never holds fails at the initial state")
{
    const RefineResult r = refine("tests/fixtures/false_gluing.coda");
    CHECK(r.verdict == Verdict::Violated);
    CHECK(r.trace.empty());
    CHECK(r.reason.find("initial") != std::string::npos);
}

TEST_CASE("derived state gluing")
{
    Model m = test::load("models/wm2.coda");
    const Model a = load_abstract(m);
    const std::string g = to_string(derive_state_gluing(m, m.find_component("WM"), 0, a));
    size_t conjuncts = 1;
    for (size_t p = g.find(") and ("); p != std::string::npos; p = g.find(") and (", p + 1))
        ++conjuncts;
    CHECK(conjuncts == 4);
    CHECK(g.find("in(WM.wmsm.LOCKINGDOOR) => in(abs.WM.wmsm.WASHING)") != std::string::npos);

    Model w1 = test::load("models/wm1.coda");
    CHECK(to_string(derive_state_gluing(w1, w1.find_component("WM"), 0, w1)) == "TRUE");

    Model w0 = test::load("models/wm0.coda");
    Model extra = load_model_text(R"(model extra
component WM {
    statemachine wmsm async {
        initial IDLE
        state IDLE
        state DRYING
        transition dry : IDLE -> DRYING links dry
    }
    statemachine other async {
        initial Q
        state Q
    }
    operation dry kind E
}
)");
    const int wm = extra.find_component("WM");
    CHECK(code_of([&] { (void)derive_state_gluing(extra, wm, 0, w0); }) == "UnmappedState");
    CHECK(code_of([&] { (void)derive_state_gluing(extra, wm, 1, w0); }) == "UnmappedState");
}

TEST_CASE("incomplete event map is rejected")
{
    Model m = load_model_text(R"(model partial
refines "models/wm0.coda" {
}
component WM {
    statemachine wmsm async {
        initial IDLE
        state IDLE
        state WASHING
        transition start : IDLE -> WASHING links go
    }
    operation go kind E
}
)",
                              test::path("partial.coda"));
    const Model a = load_abstract(m);
    CHECK_THROWS_AS(make_spec(m, a), DiagnosticError);
}
