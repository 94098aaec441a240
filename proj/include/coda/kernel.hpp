#pragma once

// Discrete-time execution of a validated model.
//
// Connectors are maps time -> value; each component has a wake queue
// time -> WakeKind. Within a clock cycle events fire one at a time:
//   P  fires when every connector of its wake group holds an entry at `now`
//      and the group has not responded yet this cycle;
//   S  fires when the owner's wake queue holds an entry at `now`;
//   E  fires at most `env_bound` times per cycle (all components together);
//   M  fires once per pending call;
//   T  and unlinked transitions fire whenever their source state is active.
// P, S, M and synchronous-machine transitions each own a sync bit that is set
// on firing and cleared by tick. Tick is enabled when every delivery and wake
// due at `now` has been answered, no method call is pending, and every
// enabled synchronous machine has fired.

#include "coda/model.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace coda {

struct KernelOptions
{
    int env_bound = 4;
    bool strict_collisions = false; // SendCollision becomes an error
    bool prune = true;              // compact channel history on tick
    int max_method_depth = 16;
    Value int_bound = kDefaultIntBound;
};

struct PendingCall
{
    int comp = -1;
    int op = -1;
    int depth = 1;
    friend auto operator<=>(const PendingCall&, const PendingCall&) = default;
};

struct RuntimeState
{
    Time now = 0;
    std::vector<std::map<Time, Value>> channels;  // per connector
    std::vector<std::map<Time, WakeKind>> wakes;  // per component
    std::vector<std::vector<Value>> vars;         // per component
    std::vector<int> config;                      // per machine (global index): active leaf, -1 inactive
    std::vector<char> fired;                      // sync bits
    std::vector<PendingCall> pending;             // sorted
    int env_count = 0;

    friend bool operator==(const RuntimeState&, const RuntimeState&) = default;
};

enum class EventKind { Operation, Transition, Tick };

struct Event
{
    EventKind kind = EventKind::Tick;
    int comp = -1;
    int op = -1;         // Operation
    int machine = -1;    // Transition: component-local machine
    int transition = -1; // Transition
    std::vector<Value> args;
    // Linked transitions taken together with an operation: (machine, transition).
    std::vector<std::pair<int, int>> linked;

    friend bool operator==(const Event&, const Event&) = default;
};

struct SendRecord
{
    std::string connector;
    std::string value;
    Time at = 0;
    friend bool operator==(const SendRecord&, const SendRecord&) = default;
};

struct Delta
{
    std::string var; // C.x
    std::string before;
    std::string after;
    friend bool operator==(const Delta&, const Delta&) = default;
};

struct EventRecord
{
    std::string event; // "C.op", "C.sm.t" or "tick"
    std::string kind;  // P S E T M, "transition" or "tick"
    Time time = 0;
    std::vector<std::pair<std::string, std::string>> bindings;
    std::vector<std::pair<std::string, std::string>> received; // wake connectors of a P operation
    std::vector<SendRecord> sends;
    std::vector<Time> wakes; // scheduled wake times
    std::vector<std::string> calls;
    std::vector<Delta> deltas;
    std::vector<std::string> transitions; // "sm.t"
    std::vector<std::string> warnings;
    friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

// Static assignment of sync bits and machine slots.
struct Layout
{
    struct Group
    {
        int comp = -1;
        std::vector<int> connectors; // sorted
        int bit = -1;
    };
    std::vector<Group> p_groups;
    std::vector<std::vector<int>> op_bit; // [comp][op] -> sync bit, -1 for E/T
    std::vector<int> s_bit;               // per component, -1 if it has no S operation
    std::vector<int> machine_base;        // per component
    std::vector<int> machine_bit;         // per global machine, -1 for async
    std::vector<std::string> bit_names;
    int machine_count = 0;
    int bit_count = 0;
};

class Kernel
{
public:
    explicit Kernel(const Model& model, KernelOptions opts = {});

    const Model& model() const { return *m_; }
    const KernelOptions& options() const { return opts_; }
    const Layout& layout() const { return layout_; }

    RuntimeState init() const;

    std::optional<Value> recv_value(const RuntimeState& s, int connector) const;
    // Returns true when an existing entry was overwritten.
    bool apply_send(RuntimeState& s, int connector, Value v, Time delay) const;
    void apply_self_wake(RuntimeState& s, int comp, Time delay) const;

    // Every fireable event, in model order; tick last when enabled.
    std::vector<Event> enabled(const RuntimeState& s) const;
    bool tick_enabled(const RuntimeState& s) const;

    // Throws Error("NotEnabled") when `e` is not in enabled(s).
    EventRecord fire(RuntimeState& s, const Event& e) const;
    // No enabledness check; for callers that took `e` from enabled(s).
    EventRecord fire_unchecked(RuntimeState& s, const Event& e) const;
    EventRecord tick(RuntimeState& s) const;

    // Why `e` is not enabled (empty if it is).
    std::vector<std::string> explain(const RuntimeState& s, const Event& e) const;
    std::vector<std::string> tick_blockers(const RuntimeState& s) const;

    std::string event_name(const Event& e) const;
    std::string kind_name(const Event& e) const;
    std::vector<std::pair<std::string, std::string>> bindings(const Event& e) const;
    std::vector<std::string> linked_names(const Event& e) const;

    // Resolves "C.op" / "C.sm.t" / "tick" with textual parameter bindings to a
    // candidate event (linked transitions not chosen). Throws Error("UnknownEvent")
    // or Error("BadBinding").
    Event lookup(const std::string& name, const std::map<std::string, std::string>& bindings) const;
    // Enabled events matching name and bindings (several when linked
    // transitions branch).
    std::vector<Event> matching(const RuntimeState& s, const std::string& name,
                                const std::map<std::string, std::string>& bindings) const;

    // Violated component and active-state invariants, as readable text.
    std::vector<std::string> violated_invariants(const RuntimeState& s) const;

    // Hashable state identity. With `relative`, times are rebased on `now`
    // and channel history before the latest past entry is ignored.
    std::string canonical_key(const RuntimeState& s, bool relative = true) const;

    // Observable "C.var", "C.sm" (leaf name, "-" when inactive) or a connector
    // name (value received now, "-" before the first delivery).
    std::optional<std::string> observe(const RuntimeState& s, const std::string& name) const;

    int global_machine(int comp, int local) const { return layout_.machine_base[comp] + local; }
    const StateMachine& machine_of(int global) const;
    int comp_of_machine(int global) const;

    // Value of the component variant, if declared.
    std::optional<Value> variant(const RuntimeState& s, int comp) const;

private:
    struct Ctx;
    bool guards_hold(const RuntimeState& s, int comp, const std::vector<Expr>& guards,
                     const std::vector<Value>& args) const;
    bool source_active(const RuntimeState& s, int comp, int machine, const Transition& t) const;
    bool machine_enabled(const RuntimeState& s, int global) const;
    void op_events(const RuntimeState& s, int comp, int op, std::vector<Event>& out) const;
    bool op_base_enabled(const RuntimeState& s, int comp, int op, std::vector<std::string>* why) const;
    bool transition_available(const RuntimeState& s, int comp, int machine, int t, const std::vector<Value>& args,
                              bool linked, std::vector<std::string>* why) const;

    const Model* m_;
    KernelOptions opts_;
    Layout layout_;
    std::vector<int> machine_comp_;
    std::vector<int> machine_local_;
};

} // namespace coda
