// Randomized kernel properties over generated models. A pruned and an
// unpruned kernel walk in lockstep; the unpruned one keeps every channel
// entry, so recv can be checked against a plain scan.

#include "doctest.h"

#include "coda/kernel.hpp"
#include "support.hpp"

#include <set>

using namespace coda;

namespace {

constexpr int kModels = 500;
constexpr int kWalksPerModel = 20;
constexpr int kSteps = 60;

std::optional<Value> scan_recv(const std::map<Time, Value>& ch, Time now)
{
    std::optional<Value> best;
    Time at = -1;
    for (const auto& [t, v] : ch)
        if (t <= now && t > at) {
            at = t;
            best = v;
        }
    return best;
}

// Sync bit owned by `e`, -1 for E operations, async transitions and tick.
int bit_of(const Kernel& k, const Event& e)
{
    const Layout& l = k.layout();
    if (e.kind == EventKind::Tick)
        return -1;
    if (e.kind == EventKind::Transition)
        return l.machine_bit[k.global_machine(e.comp, e.machine)];
    if (const int b = l.op_bit[e.comp][e.op]; b >= 0)
        return b;
    for (const auto& [mach, t] : e.linked)
        if (const int b = l.machine_bit[k.global_machine(e.comp, mach)]; b >= 0)
            return b;
    return -1;
}

} // namespace

TEST_CASE("kernel properties on random walks")
{
    KernelOptions pruned_opts;
    KernelOptions raw_opts;
    raw_opts.prune = false;
    long walks = 0, events = 0, ticks = 0, recv_checks = 0;

    for (int mi = 0; mi < kModels; ++mi) {
        test::ModelGen gen(0xC0DA0000u + mi);
        const std::string text = gen.generate("gen" + std::to_string(mi));
        Model m = load_model_text(text);
        const Kernel k(m, pruned_opts);
        const Kernel raw(m, raw_opts);

        for (int w = 0; w < kWalksPerModel; ++w, ++walks) {
            RuntimeState s = k.init();
            RuntimeState u = raw.init();
            std::set<int> fired_bits;
            for (int step = 0; step < kSteps; ++step) {
                const auto en = k.enabled(s);
                REQUIRE(en == raw.enabled(u));
                CHECK(k.tick_enabled(s) == raw.tick_enabled(u));
                CHECK(k.canonical_key(s) == raw.canonical_key(u));
                for (size_t c = 0; c < m.connectors.size(); ++c, ++recv_checks) {
                    const auto want = scan_recv(u.channels[c], u.now);
                    CHECK(raw.recv_value(u, static_cast<int>(c)) == want);
                    CHECK(k.recv_value(s, static_cast<int>(c)) == want);
                }
                for (const auto& comp : m.components)
                    for (const auto& v : comp.vars) {
                        const std::string name = comp.name + "." + v.name;
                        CHECK(k.observe(s, name) == raw.observe(u, name));
                    }
                if (en.empty())
                    break;

                if (k.tick_enabled(s)) {
                    CHECK(s.pending.empty());
                    // every obligation of the cycle has been met
                    for (const auto& e : en)
                        CHECK(bit_of(k, e) < 0);
                }

                const Event& e = en[std::uniform_int_distribution<size_t>(0, en.size() - 1)(gen.rng())];
                const Time before = s.now;
                k.fire(s, e);
                raw.fire(u, e);
                ++events;
                if (e.kind == EventKind::Tick) {
                    ++ticks;
                    CHECK(s.now == before + 1);
                    fired_bits.clear();
                } else {
                    CHECK(s.now == before);
                    if (const int b = bit_of(k, e); b >= 0)
                        CHECK(fired_bits.insert(b).second);
                }
                CHECK(s.now == u.now);
                CHECK(s.vars == u.vars);
                CHECK(s.config == u.config);
                CHECK(s.wakes == u.wakes);
            }
        }
    }
    CHECK(walks >= 10000);
    MESSAGE(walks << " walks, " << events << " events, " << ticks << " ticks, " << recv_checks << " recv checks");
}

TEST_CASE("recv against a linear scan on random channel histories")
{
    Model m = load_model_text("model one\nconnector c : NAT from A to B\ncomponent A {\n}\n"
                              "component B {\n    operation on kind P wakes c\n}\n");
    const Kernel k(m);
    std::mt19937_64 rng(42);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    for (int i = 0; i < 10000; ++i) {
        RuntimeState s = k.init();
        s.now = pick(0, 30);
        const int n = pick(0, 8);
        for (int j = 0; j < n; ++j)
            s.channels[0][pick(0, 40)] = pick(0, 100);
        REQUIRE(k.recv_value(s, 0) == scan_recv(s.channels[0], s.now));
    }
}

TEST_CASE("send and self wake land at now + delay")
{
    Model m = load_model_text("model one\nconnector c : NAT from A to B\ncomponent A {\n"
                              "    operation w kind S\n}\ncomponent B {\n    operation on kind P wakes c\n}\n");
    const Kernel k(m);
    std::mt19937_64 rng(7);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    for (int i = 0; i < 10000; ++i) {
        RuntimeState s = k.init();
        s.now = pick(0, 50);
        const Time d = pick(0, 10);
        const Value v = pick(0, 1000);
        const auto before = s.channels[0];
        const bool overwrote = k.apply_send(s, 0, v, d);
        REQUIRE(s.channels[0].at(s.now + d) == v);
        REQUIRE(overwrote == before.count(s.now + d) > 0);
        k.apply_self_wake(s, 0, d);
        REQUIRE(s.wakes[0].count(s.now + d) == 1);
    }
}
