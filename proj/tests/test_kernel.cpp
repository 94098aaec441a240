#include "doctest.h"

#include "coda/scenario.hpp"
#include "support.hpp"

#include <algorithm>
#include <functional>

using namespace coda;

namespace {

const char* kPair = R"(model pair
context c { set SIG { a, b, c, v } }
connector lock : BOOL from W to D
connector sig : SIG from W to D
component W {
    var n : NAT = 0
    operation send kind E {
        param d : NAT in 0..3
        action port_send(lock, TRUE, delay d)
    }
    operation sendTwice kind E {
        action port_send(lock, TRUE, delay 2)
        action port_send(lock, FALSE, delay 2)
    }
    operation nap kind E {
        param d : NAT in 0..3
        action self_wake(delay d)
    }
    operation woke kind S {
        guard n < 100
        action n := n + 1
    }
}
component D {
    var locked : BOOL = FALSE
    var hits : NAT = 0
    operation lockIt kind P wakes lock {
        guard recv(lock) = TRUE
        action locked := TRUE
        action hits := hits + 1
    }
    operation other kind P wakes lock {
        action hits := hits + 10
    }
    operation seen kind P wakes sig
}
)";

Event ev(const Kernel& k, const RuntimeState& s, const std::string& name, std::map<std::string, std::string> b = {})
{
    auto c = k.matching(s, name, b);
    INFO(name);
    REQUIRE(!c.empty());
    return c.front();
}

bool is_enabled(const Kernel& k, const RuntimeState& s, const std::string& name)
{
    for (const auto& e : k.enabled(s))
        if (k.event_name(e) == name)
            return true;
    return false;
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

TEST_CASE("init")
{
    Model m = load_model_text(kPair);
    Kernel k(m);
    RuntimeState s = k.init();
    CHECK(s.now == 0);
    for (const auto& ch : s.channels)
        CHECK(ch.empty());
    for (const auto& w : s.wakes)
        CHECK(w.empty());
    CHECK(s.pending.empty());

    Model wm = test::load("models/wm0.coda");
    Kernel kw(wm);
    CHECK(*kw.observe(kw.init(), "WM.wmsm") == "IDLE");
}

TEST_CASE("machine entered by a method starts inactive")
{
    Model m = test::load("models/io1.coda");
    Kernel k(m);
    RuntimeState s = k.init();
    CHECK(*k.observe(s, "Controller.IO") == "-");
    CHECK_FALSE(is_enabled(k, s, "Controller.SetA"));
    k.fire(s, ev(k, s, "Controller.RecvPowerUp"));
    CHECK(s.pending.size() == 1);
    CHECK_FALSE(k.tick_enabled(s));
    k.fire(s, ev(k, s, "Controller.StartIO"));
    CHECK(*k.observe(s, "Controller.IO") == "READY");
    CHECK(s.pending.empty());
}

TEST_CASE("recv: latest entry not in the future")
{
    Model m = load_model_text(kPair);
    Kernel k(m);
    RuntimeState s = k.init();
    const int sig = m.find_connector("sig");
    const auto& t = m.connectors[sig].type;
    auto val = [&](const char* n) { return *parse_value(m, t, n); };

    s.channels[sig] = {{5, val("a")}, {8, val("b")}};
    s.now = 9;
    CHECK(k.recv_value(s, sig) == val("b"));

    s.channels[sig] = {{12, val("c")}};
    CHECK_FALSE(k.recv_value(s, sig).has_value());

    s.channels[sig] = {{9, val("v")}};
    CHECK(k.recv_value(s, sig) == val("v"));
}

TEST_CASE("send writes at now + delay")
{
    Model m = load_model_text(kPair);
    Kernel k(m);
    RuntimeState s = k.init();
    const int lock = m.find_connector("lock");
    s.now = 10;
    CHECK_FALSE(k.apply_send(s, lock, 1, 3));
    CHECK(s.channels[lock].count(13));
    CHECK(s.channels[lock].at(13) == 1);

    s.now = 7;
    k.apply_send(s, lock, 1, 0);
    CHECK(k.recv_value(s, lock) == 1);

    CHECK(k.apply_send(s, lock, 0, 6)); // overwrites the entry at 13
    CHECK(s.channels[lock].at(13) == 0);
    CHECK(code_of([&] { k.apply_send(s, lock, 1, -1); }) == "RangeError");
}

TEST_CASE("send collision: last write wins with a warning, or an error in strict mode")
{
    Model m = load_model_text(kPair);
    {
        Kernel k(m);
        RuntimeState s = k.init();
        const EventRecord r = k.fire(s, ev(k, s, "W.sendTwice"));
        CHECK(s.channels[m.find_connector("lock")].at(2) == 0);
        REQUIRE(r.warnings.size() == 1);
        CHECK(r.warnings[0].find("SendCollision") != std::string::npos);
    }
    {
        KernelOptions o;
        o.strict_collisions = true;
        Kernel k(m, o);
        RuntimeState s = k.init();
        CHECK(code_of([&] { k.fire(s, ev(k, s, "W.sendTwice")); }) == "SendCollision");
    }
}

TEST_CASE("self wake")
{
    Model m = load_model_text(kPair);
    Kernel k(m);
    RuntimeState s = k.init();
    const int w = m.find_component("W");
    s.now = 4;
    k.apply_self_wake(s, w, 3);
    CHECK(s.wakes[w].count(7));
    k.apply_self_wake(s, w, 3);
    CHECK(s.wakes[w].size() == 1);
    k.apply_self_wake(s, w, 0);
    CHECK(s.wakes[w].count(4));
    CHECK(is_enabled(k, s, "W.woke"));
    CHECK_FALSE(k.tick_enabled(s));
}

TEST_CASE("S operation enabled exactly when now is in the wake queue")
{
    Model m = load_model_text(kPair);
    Kernel k(m);
    RuntimeState s = k.init();
    k.fire(s, ev(k, s, "W.nap", {{"d", "2"}}));
    for (int t = 0; t < 2; ++t) {
        CHECK_FALSE(is_enabled(k, s, "W.woke"));
        k.tick(s);
    }
    CHECK(s.now == 2);
    CHECK(is_enabled(k, s, "W.woke"));
    CHECK_FALSE(k.tick_enabled(s));
    k.fire(s, ev(k, s, "W.woke"));
    CHECK_FALSE(is_enabled(k, s, "W.woke")); // once per cycle
    CHECK(k.tick_enabled(s));
}

TEST_CASE("wake with no S operation able to respond deadlocks")
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
    KernelOptions o;
    o.env_bound = 1;
    Kernel k(m, o);
    RuntimeState s = k.init();
    k.fire(s, ev(k, s, "A.arm"));
    k.tick(s);
    CHECK(k.enabled(s).empty());
    auto why = k.tick_blockers(s);
    REQUIRE_FALSE(why.empty());
}

TEST_CASE("tick guards: deliveries and wake-ups due now block the clock")
{
    Model m = load_model_text(kPair);
    Kernel k(m);
    RuntimeState s = k.init();
    auto names = [&] {
        std::vector<std::string> out;
        for (const auto& e : k.enabled(s))
            out.push_back(k.event_name(e));
        return out;
    };
    auto only = names();
    CHECK(std::find(only.begin(), only.end(), "tick") != only.end());
    for (const auto& n : only)
        CHECK((n == "tick" || n.rfind("W.s", 0) == 0 || n == "W.nap"));

    k.fire(s, ev(k, s, "W.send", {{"d", "1"}}));
    k.tick(s);
    CHECK(is_enabled(k, s, "D.lockIt"));
    CHECK(is_enabled(k, s, "D.other"));
    CHECK_FALSE(k.tick_enabled(s));
    CHECK_THROWS_AS(k.tick(s), Error);

    // one group, one response: the entry stays but the group is satisfied
    k.fire(s, ev(k, s, "D.lockIt"));
    CHECK_FALSE(is_enabled(k, s, "D.other"));
    CHECK(s.channels[m.find_connector("lock")].count(1));
    CHECK(k.tick_enabled(s));
    k.tick(s);
    CHECK(s.now == 2);
}

TEST_CASE("tick advances by one and clears the cycle's flags")
{
    Model m = load_model_text(kPair);
    Kernel k(m);
    RuntimeState s = k.init();
    s.now = 5;
    k.tick(s);
    CHECK(s.now == 6);
    CHECK(std::all_of(s.fired.begin(), s.fired.end(), [](char c) { return c == 0; }));
    CHECK(s.env_count == 0);
}

TEST_CASE("pruning keeps the latest past entry and the future")
{
    Model m = load_model_text(kPair);
    Kernel k(m);
    RuntimeState s = k.init();
    const int sig = m.find_connector("sig");
    s.channels[sig] = {{1, 0}, {3, 1}, {9, 2}};
    s.now = 5;
    const auto before = k.recv_value(s, sig);
    k.tick(s);
    CHECK(s.channels[sig] == std::map<Time, Value>{{3, 1}, {9, 2}});
    CHECK(k.recv_value(s, sig) == before);

    KernelOptions o;
    o.prune = false;
    Kernel raw(m, o);
    RuntimeState u = raw.init();
    u.channels[sig] = {{1, 0}, {3, 1}, {9, 2}};
    u.now = 5;
    raw.tick(u);
    CHECK(u.channels[sig].size() == 3);
}

TEST_CASE("environment bound per cycle")
{
    Model m = load_model_text(kPair);
    KernelOptions o;
    o.env_bound = 2;
    Kernel k(m, o);
    RuntimeState s = k.init();
    k.fire(s, ev(k, s, "W.nap", {{"d", "3"}}));
    k.fire(s, ev(k, s, "W.nap", {{"d", "3"}}));
    CHECK_FALSE(is_enabled(k, s, "W.nap"));
    k.tick(s);
    CHECK(is_enabled(k, s, "W.nap"));
}

TEST_CASE("firing a disabled event")
{
    Model m = load_model_text(kPair);
    Kernel k(m);
    RuntimeState s = k.init();
    CHECK(code_of([&] { k.fire(s, k.lookup("D.lockIt", {})); }) == "NotEnabled");
    CHECK(code_of([&] { k.lookup("D.nothing", {}); }) == "UnknownEvent");
    CHECK(code_of([&] { k.lookup("W.send", {{"d", "9"}}); }) == "BadBinding");
}

TEST_CASE("control panel start reaches the washing machine")
{
    Model m = test::load("models/wm1.coda");
    Kernel k(m);
    RuntimeState s = k.init();
    const EventRecord r = k.fire(s, ev(k, s, "CP.UserStart", {{"pid", "QUICK"}}));
    REQUIRE(r.sends.size() == 1);
    CHECK(r.sends[0].connector == "CI");
    CHECK(r.sends[0].at == 1);
    k.fire(s, ev(k, s, "WM.sendWaiting"));
    k.tick(s);
    CHECK(*k.observe(s, "WM.wmsm") == "IDLE");
    const EventRecord st = k.fire(s, ev(k, s, "WM.start"));
    CHECK(st.transitions == std::vector<std::string>{"wmsm.start"});
    CHECK(*k.observe(s, "WM.wmsm") == "WASHING");
}

TEST_CASE("assumeLocked enters INPROGRESS once the wake is due")
{
    Model m = test::load("models/wm2.coda");
    Kernel k(m);
    RuntimeState s = k.init();
    Scenario sc = parse_scenario("max-time 4\nat 0 fire CP.UserStart with pid=QUICK\n");
    RunResult r = run(k, sc);
    const auto it = std::find_if(r.records.begin(), r.records.end(),
                                 [](const EventRecord& e) { return e.event == "WM.assumeLocked"; });
    REQUIRE(it != r.records.end());
    CHECK(it->time == 4);
    CHECK(*k.observe(r.final_state, "WM.wmsm") == "INPROGRESS");
}

TEST_CASE("transition from a superstate leaves any substate")
{
    Model m = test::load("models/wm2.coda");
    Kernel k(m);
    RuntimeState s = k.init();
    const int door = m.find_component("DOOR");
    const auto& sm = m.components[door].machines[0];
    const int g = k.global_machine(door, 0);
    s.config[g] = sm.find_state("DOORLOCKED");
    k.apply_send(s, m.find_connector("lock"), 0, 0);
    const EventRecord r = k.fire(s, ev(k, s, "DOOR.unlockDoor"));
    CHECK(r.transitions == std::vector<std::string>{"doorsm.unlockDoor"});
    CHECK(*k.observe(s, "DOOR.doorsm") == "DOORUNLOCKED");
}

TEST_CASE("methods complete within the cycle and nest to a bounded depth")
{
    Model m = load_model_text(R"(model calls
component A {
    var n : NAT = 0
    operation go kind E {
        action call first
    }
    operation first kind M {
        action n := n + 1
        action call second
    }
    operation second kind M {
        action n := n + 1
    }
}
)");
    Kernel k(m);
    RuntimeState s = k.init();
    k.fire(s, ev(k, s, "A.go"));
    CHECK_FALSE(k.tick_enabled(s));
    k.fire(s, ev(k, s, "A.first"));
    CHECK_FALSE(k.tick_enabled(s));
    k.fire(s, ev(k, s, "A.second"));
    CHECK(s.pending.empty());
    CHECK(k.tick_enabled(s));

    // m0 calls m1 calls ... m17
    std::string chain = "model deep\ncomponent A {\n    operation go kind E {\n        action call m0\n    }\n";
    for (int i = 0; i < 18; ++i) {
        chain += "    operation m" + std::to_string(i) + " kind M";
        chain += i < 17 ? " {\n        action call m" + std::to_string(i + 1) + "\n    }\n" : "\n";
    }
    chain += "}\n";
    Model dm = load_model_text(chain);
    Kernel dk(dm);
    RuntimeState ds = dk.init();
    dk.fire(ds, ev(dk, ds, "A.go"));
    std::string code;
    for (int i = 0; i < 18 && code.empty(); ++i)
        code = code_of([&] { dk.fire(ds, ev(dk, ds, "A.m" + std::to_string(i))); });
    CHECK(code == "MethodDepthExceeded");
}

TEST_CASE("synchronous machine must fire before the clock moves")
{
    Model m = load_model_text(R"(model clocked
component A {
    var n : NAT = 0
    statemachine s sync {
        initial X
        state X
        state Y
        transition go : X -> Y links go
        transition back : Y -> X links back
    }
    operation go kind T {
        action n := n + 1
    }
    operation back kind T
}
)");
    Kernel k(m);
    RuntimeState s = k.init();
    CHECK_FALSE(k.tick_enabled(s));
    k.fire(s, ev(k, s, "A.go"));
    CHECK_FALSE(is_enabled(k, s, "A.back"));
    CHECK(k.tick_enabled(s));
    k.tick(s);
    CHECK(is_enabled(k, s, "A.back"));
}

TEST_CASE("unsynchronised transitions must decrease the variant")
{
    Model m = load_model_text(R"(model spin
component A {
    var v : NAT = 3
    variant v
    statemachine s async {
        initial X
        state X
        state Y
        transition there : X -> Y links there
        transition back : Y -> X links back
    }
    operation there kind T {
        action v := v - 1
    }
    operation back kind T
}
)");
    Kernel k(m);
    RuntimeState s = k.init();
    k.fire(s, ev(k, s, "A.there"));
    CHECK(code_of([&] { k.fire(s, ev(k, s, "A.back")); }) == "VariantNotDecreased");
}

TEST_CASE("run: empty scenario on a minimal model")
{
    Model m = load_model_text("model minimal\ncomponent C {\n    operation poke kind E\n}\n");
    Kernel k(m);
    Scenario sc = parse_scenario("max-time 10\n");
    RunResult r = run(k, sc);
    REQUIRE(r.records.size() == 10);
    for (size_t i = 0; i < r.records.size(); ++i) {
        CHECK(r.records[i].event == "tick");
        CHECK(r.records[i].time == static_cast<Time>(i));
    }
    CHECK(r.final_state.now == 10);
}

TEST_CASE("run: RUNNING comes back on WMSTATE")
{
    Model m = test::load("models/wm1.coda");
    Kernel k(m);
    RunResult r = run(k, parse_scenario("max-time 4\nat 1 fire CP.UserStart with pid=NORMAL\n"));
    bool running = false;
    for (const auto& rec : r.records)
        for (const auto& snd : rec.sends)
            running |= snd.connector == "WMSTATE" && snd.value == "RUNNING" && rec.event == "WM.start";
    CHECK(running);
}

TEST_CASE("run: unsatisfiable schedule")
{
    Model m = test::load("models/wm1.coda");
    Kernel k(m);
    CHECK(code_of([&] { run(k, parse_scenario("max-time 4\nat 2 fire WM.rinse\n")); }) == "ScheduleUnsatisfiable");
}

TEST_CASE("run: policies")
{
    Model m = test::load("models/wm2.coda");
    Kernel k(m);
    Scenario sc = parse_scenario(read_file(test::path("scenarios/wm2_cycle.scn")));
    const RunResult lex = run(k, sc);
    RunOptions rev;
    rev.policy = "reverse";
    const RunResult back = run(k, sc, rev);
    CHECK(lex.records.size() == back.records.size());
    CHECK(lex.final_state.now == back.final_state.now);
    RunOptions rnd;
    rnd.policy = "random:7";
    CHECK(run(k, sc, rnd).records == run(k, sc, rnd).records);
    CHECK(code_of([] { Policy::parse("sideways"); }) == "BadPolicy");
}

TEST_CASE("replay reproduces a run")
{
    Model m = test::load("models/wm3.coda");
    Kernel k(m);
    RunResult r = run(k, parse_scenario(read_file(test::path("scenarios/wm3_normal.scn"))));
    CHECK(replay(k, r.records) == r.final_state);
    auto broken = r.records;
    broken[3].time += 1;
    CHECK(code_of([&] { replay(k, broken); }) == "ReplayMismatch");
}

TEST_CASE("trace files round-trip")
{
    Model m = test::load("models/io1.coda");
    Kernel k(m);
    RunResult r = run(k, parse_scenario(read_file(test::path("scenarios/io1_powerup.scn"))));
    const std::string text = trace_to_jsonl(m, r.records);
    CHECK(trace_from_jsonl(text) == r.records);
    CHECK(text == trace_to_jsonl(m, trace_from_jsonl(text)));
}
