#include "doctest.h"

#include "coda/validate.hpp"
#include "support.hpp"

using namespace coda;

TEST_CASE("port-wake operation")
{
    auto r = parse("model m\ncomponent WM { operation start kind P wakes CI { guard TRUE } }\n");
    REQUIRE(r.model);
    const auto& op = r.model->components[0].operations[0];
    CHECK(op.kind == OpKind::P);
    CHECK(op.wakes == std::vector<std::string>{"CI"});
}

TEST_CASE("abstract washing machine shape")
{
    Model m = test::load("models/wm0.coda");
    REQUIRE(m.components.size() == 1);
    REQUIRE(m.components[0].machines.size() == 1);
    const auto& sm = m.components[0].machines[0];
    CHECK(sm.name == "wmsm");
    CHECK(sm.states.size() == 4);
    CHECK(sm.transitions.size() == 7);
}

TEST_CASE("unknown kind letter")
{
    auto r = parse("model m\ncomponent A {\n    operation o kind Q\n}\n", "k.coda");
    CHECK_FALSE(r.model);
    REQUIRE_FALSE(r.diagnostics.empty());
    const auto& d = r.diagnostics[0];
    CHECK(d.code == "SyntaxError");
    CHECK(d.message.find("P, S, E, T, M") != std::string::npos);
    CHECK(d.span.start_line == 3);
    CHECK(d.span.file == "k.coda");
}

TEST_CASE("duplicate declaration")
{
    auto r = parse("model m\ncomponent A {}\ncomponent A {}\n");
    bool found = false;
    for (const auto& d : r.diagnostics)
        found |= d.code == "DuplicateDeclaration";
    if (r.model) {
        Model m = *r.model;
        for (const auto& d : validate(m))
            found |= d.code == "DuplicateDeclaration";
    }
    CHECK(found);
}

TEST_CASE("printing is canonical")
{
    const char* a = "model m\ncomponent A { var x : NAT = 0\n operation o kind E { action x := x + 1 } }\n";
    const char* b = "// same model\nmodel   m\n\ncomponent A {\n  var x : NAT = 0 // counter\n  operation o kind E {\n"
                    "    action x := x + 1\n  }\n}\n";
    const Model ma = parse_or_throw(a), mb = parse_or_throw(b);
    CHECK(ma == mb);
    CHECK(print(ma) == print(mb));
    CHECK(print(ma) == print(parse_or_throw(print(ma))));
}

TEST_CASE("nested states survive printing")
{
    Model m = test::load("models/wm2.coda");
    const std::string text = print(m);
    Model back = parse_or_throw(text);
    CHECK(back == m);
    const auto& sm = back.components[back.find_component("WM")].machines[0];
    const int idle = sm.find_state("IDLE");
    REQUIRE(idle >= 0);
    CHECK(sm.states[sm.find_state("UNLOCKINGDOOR")].parent == idle);
    CHECK(sm.states[sm.find_state("IDLEWAITING")].parent == idle);
}

TEST_CASE("shipped models round-trip")
{
    for (const auto& name : test::shipped_models()) {
        CAPTURE(name);
        Model m = test::load("models/" + name + ".coda");
        Model back = parse_or_throw(print(m));
        CHECK(back == m);
        CHECK(print(back) == print(m));
    }
}

TEST_CASE("random models round-trip")
{
    for (int seed = 0; seed < 500; ++seed) {
        test::ModelGen gen(seed);
        const std::string text = gen.generate("r" + std::to_string(seed));
        CAPTURE(seed);
        Model m = load_model_text(text);
        Model back = validated(parse_or_throw(print(m)));
        CHECK(back == m);
        CHECK(print(back) == print(m));
        CHECK(model_hash(back) == model_hash(m));
    }
}

TEST_CASE("refines block")
{
    Model m = test::load("models/wm2.coda");
    REQUIRE(m.refines);
    CHECK(m.refines->path == "wm1.coda");
    CHECK_FALSE(m.refines->events.empty());
}

TEST_CASE("syntax errors carry spans")
{
    for (const char* text : {"model", "model m\ncomponent {", "model m\ncomponent A { var x : NAT = }",
                             "model m\nconnector c : BOOL from A\n", "model m\ncomponent A { operation o kind E { guard ( } }"}) {
        auto r = parse(text, "e.coda");
        CAPTURE(text);
        CHECK_FALSE(r.model);
        REQUIRE_FALSE(r.diagnostics.empty());
        CHECK(r.diagnostics[0].span.start_line >= 1);
    }
}
