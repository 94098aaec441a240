#include "doctest.h"

#include "coda/validate.hpp"
#include "support.hpp"

#include <algorithm>

using namespace coda;

namespace {

Diagnostics diagnose(const std::string& text)
{
    auto r = parse(text, "t.coda");
    if (!r.model)
        return r.diagnostics;
    Model m = *r.model;
    return validate(m);
}

bool has_code(const Diagnostics& d, const std::string& code)
{
    return std::any_of(d.begin(), d.end(), [&](const Diagnostic& x) { return x.code == code && x.severity == Severity::Error; });
}

const char* kMinimal = R"(model minimal
component C {
    operation poke kind E {
        guard TRUE
    }
}
)";

} // namespace

TEST_CASE("minimal model validates")
{
    auto d = diagnose(kMinimal);
    CHECK_FALSE(has_errors(d));
    Model m = load_model_text(kMinimal);
    CHECK(m.validated);
    CHECK(m.components.size() == 1);
    CHECK(m.components[0].operations[0].kind == OpKind::E);
}

TEST_CASE("port wake bound to a connector of another component")
{
    auto d = diagnose(R"(model m
context c { set PID { QUICK } }
connector CI : PID from CP to WM
component CP {
    operation start kind P wakes CI
}
component WM {
    operation take kind P wakes CI
}
)");
    CHECK(has_code(d, "IllegalActionPlacement"));
}

TEST_CASE("port send from the receiving side")
{
    auto d = diagnose(R"(model m
connector c : BOOL from A to B
component A {}
component B {
    operation go kind E {
        action port_send(c, TRUE, delay 1)
    }
    operation got kind P wakes c
}
)");
    CHECK(has_code(d, "IllegalActionPlacement"));
}

TEST_CASE("environment operation linked to a synchronous machine")
{
    auto d = diagnose(R"(model m
component A {
    statemachine s sync {
        initial X
        state X
        state Y
        transition go : X -> Y links go
        transition back : Y -> X
    }
    operation go kind E
}
)");
    CHECK(has_code(d, "KindConstraintViolation"));
}

TEST_CASE("every error is reported, each with a span")
{
    auto d = diagnose(R"(model m
component A {
    var x : NAT = 0
    operation one kind E {
        guard y > 0
        action x := TRUE
    }
    operation two kind E {
        action z := 1
    }
}
)");
    size_t errors = 0;
    for (const auto& x : d)
        if (x.severity == Severity::Error) {
            ++errors;
            CHECK(x.span.start_line > 0);
        }
    CHECK(errors >= 3);
    CHECK(has_code(d, "UnresolvedName"));
    CHECK(has_code(d, "TypeMismatch"));
}

TEST_CASE("level-4 washing machine")
{
    Model m = test::load("models/wm4.coda");
    std::vector<std::string> comps, cons;
    for (const auto& c : m.components)
        comps.push_back(c.name);
    for (const auto& c : m.connectors)
        cons.push_back(c.name);
    std::sort(comps.begin(), comps.end());
    std::sort(cons.begin(), cons.end());
    CHECK(comps == std::vector<std::string>{"CP", "DOOR", "DRUM_SYSTEM", "WM"});
    CHECK(cons == std::vector<std::string>{"CI", "WMSTATE", "coldFill", "doorPosition", "drainPump", "hotFill", "level",
                                           "lock", "temperature"});
}

TEST_CASE("all shipped models validate")
{
    for (const auto& name : test::shipped_models()) {
        CAPTURE(name);
        CHECK_NOTHROW(test::load("models/" + name + ".coda"));
    }
}

TEST_CASE("type_of")
{
    Model m = load_model_text(R"(model m
connector level : NAT from D to W
connector lock : BOOL from W to D
component D {
    operation l kind P wakes lock
}
component W {
    operation r kind P wakes level
}
)");
    auto expr = [](const std::string& text) {
        auto r = parse("model e\ncomponent X { operation o kind E { guard " + text + " } }\n");
        REQUIRE(r.model);
        return r.model->components[0].operations[0].guards[0];
    };
    CHECK(type_of(m, "W", expr("recv(level) >= 20")) == ValueType::boolean());
    CHECK(type_of(m, "W", expr("recv(level) + 1")) == ValueType::nat());
    CHECK(type_of(m, "D", expr("recv(lock)")) == ValueType::boolean());
    CHECK_THROWS_WITH_AS(type_of(m, "W", expr("3 + TRUE")), doctest::Contains("3 + TRUE"), Error);
    try {
        type_of(m, "W", expr("3 + TRUE"));
    } catch (const Error& e) {
        CHECK(e.code() == "TypeMismatch");
    }
    // recv only in the receiving component
    CHECK_THROWS_AS(type_of(m, "D", expr("recv(level) > 1")), Error);
}

TEST_CASE("validation is idempotent")
{
    for (const auto& name : test::shipped_models()) {
        Model m = test::load("models/" + name + ".coda");
        Model again = m;
        CHECK_FALSE(has_errors(validate(again)));
        CHECK(again == m);
        CHECK(print(again) == print(m));
    }
}

TEST_CASE("large literal draws an overflow warning")
{
    auto d = diagnose(R"(model m
component A {
    var x : INT = 3000000000
}
)");
    CHECK(std::any_of(d.begin(), d.end(), [](const Diagnostic& x) { return x.severity == Severity::Warning; }));
}

TEST_CASE("wake group members target the owner")
{
    for (const auto& name : test::shipped_models()) {
        Model m = test::load("models/" + name + ".coda");
        for (size_t c = 0; c < m.components.size(); ++c)
            for (const auto& op : m.components[c].operations) {
                if (op.kind != OpKind::P)
                    continue;
                CHECK_FALSE(op.wake_ids.empty());
                for (int k : op.wake_ids)
                    CHECK(m.connectors[k].target_comp == static_cast<int>(c));
            }
    }
}
