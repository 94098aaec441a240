#include "doctest.h"

#include "coda/eventb.hpp"
#include "support.hpp"

#include <filesystem>
#include <sstream>

using namespace coda;

namespace {

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);)
        out.push_back(l);
    return out;
}

// Names between `variables` and `// bookkeeping`.
std::vector<std::string> model_variables(const std::string& machine)
{
    std::vector<std::string> out;
    bool in = false;
    for (const auto& l : lines(machine)) {
        if (l == "variables") {
            in = true;
            continue;
        }
        if (!in)
            continue;
        if (l.find("// bookkeeping") != std::string::npos || l == "invariants")
            break;
        out.push_back(l.substr(l.find_first_not_of(' ')));
    }
    return out;
}

std::string block(const std::string& machine, const std::string& head)
{
    auto b = machine.find(" event " + head + "\n");
    REQUIRE(b != std::string::npos);
    b = machine.rfind('\n', b) + 1;
    const auto e = machine.find("\n    end", b);
    return machine.substr(b, e - b);
}

size_t count(const std::string& text, const std::string& needle)
{
    size_t n = 0;
    for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + needle.size()))
        ++n;
    return n;
}

EmittedModel emit_file(const std::string& rel)
{
    Model m = test::load(rel);
    if (!m.refines)
        return emit(m);
    const Model a = load_abstract(m);
    return emit_refinement(make_spec(m, a));
}

} // namespace

TEST_CASE("one variable per clock, connector, wake queue, machine and component variable")
{
    for (const auto& name : test::shipped_models()) {
        Model m = test::load("models/" + name + ".coda");
        const EmittedModel e = emit(m);
        size_t machines = 0, vars = 0;
        for (const auto& c : m.components) {
            machines += c.machines.size();
            vars += c.vars.size();
        }
        CAPTURE(name);
        CHECK(model_variables(e.machine).size() == 1 + m.connectors.size() + m.components.size() + machines + vars);
    }
}

TEST_CASE("tick is guarded once per connector and per wake queue")
{
    const EmittedModel e = emit_file("models/wm2.coda");
    const std::string tick = block(e.machine, "tick");
    CHECK(count(tick, "∉ dom(") == 4 + 3);
    for (const char* c : {"CI", "WMSTATE", "lock", "doorPosition", "CP_wakeup", "WM_wakeup", "DOOR_wakeup"})
        CHECK(count(tick, std::string("current_time ∉ dom(") + c + ")") == 1);
    CHECK(tick.find("current_time ≔ current_time + 1") != std::string::npos);
}

TEST_CASE("typing of connectors and wake queues")
{
    const EmittedModel e = emit_file("models/wm2.coda");
    CHECK(e.machine.find("lock ∈ ℕ ⇸ BOOL") != std::string::npos);
    CHECK(e.machine.find("DOOR_wakeup ∈ ℕ ⇸ WakeKind") != std::string::npos);
    CHECK(e.context.find("WakeKind") != std::string::npos);
}

TEST_CASE("received values are bound as event parameters")
{
    const EmittedModel e = emit_file("models/wm1.coda");
    const std::string running = block(e.machine, "CP_Running");
    CHECK(running.find("anticipated event CP_Running") != std::string::npos);
    CHECK(running.find("any WMSTATE_v") != std::string::npos);
    CHECK(running.find("current_time ∈ dom(WMSTATE)") != std::string::npos);
    CHECK(running.find("CP_display ≔ WMSTATE_v") != std::string::npos);
}

TEST_CASE("refinement output")
{
    const EmittedModel e = emit_file("models/wm2.coda");
    CHECK(e.machine.find("refines wm1") != std::string::npos);
    CHECK(e.machine.find("wmsm = LOCKINGDOOR ⇒ wmsm_abs = WASHING") != std::string::npos);
    CHECK(e.machine.find("convergent event WM_assumeLocked") != std::string::npos);
    CHECK(e.machine.find("variant") != std::string::npos);
}

TEST_CASE("output is deterministic")
{
    for (const auto& name : test::shipped_models()) {
        const EmittedModel a = emit_file("models/" + name + ".coda");
        const EmittedModel b = emit_file("models/" + name + ".coda");
        CHECK(a.context == b.context);
        CHECK(a.machine == b.machine);
        CHECK(a.machine.find('\r') == std::string::npos);
    }
}

TEST_CASE("model with nothing in it")
{
    Model m = load_model_text("model empty\n");
    const EmittedModel e = emit(m);
    CHECK(model_variables(e.machine) == std::vector<std::string>{"current_time"});
    const std::string tick = block(e.machine, "tick");
    CHECK(count(tick, "∉ dom(") == 0);
}

TEST_CASE("shared operation with transition actions is unsupported")
{
    Model m = load_model_text(R"(model shared
component A {
    var n : NAT = 0
    statemachine s async {
        initial X
        state X
        state Y
        transition one : X -> Y links go {
            action n := 1
        }
        transition two : Y -> X links go
    }
    operation go kind E
}
)");
    try {
        emit(m);
        FAIL("expected UnsupportedConstruct");
    } catch (const Error& err) {
        CHECK(std::string(err.code()) == "UnsupportedConstruct");
        CHECK(std::string(err.what()).find("one") != std::string::npos);
    }
}

TEST_CASE("files are written next to each other")
{
    const EmittedModel e = emit_file("models/wm0.coda");
    const auto dir = std::filesystem::temp_directory_path() / "coda_emit_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto files = write_emitted(e, dir.string());
    REQUIRE(files.size() == 2);
    CHECK(files[0].ends_with("wm0.ctx.eventb"));
    CHECK(files[1].ends_with("wm0.mch.eventb"));
    CHECK(read_file(files[1]) == e.machine);
}
