#pragma once

// In-memory representation of a CODA model: contexts, components,
// connectors, operations and hierarchical state machines, plus the
// expression language used by guards, actions and invariants.
//
// The parser produces a raw model (names only). validate() resolves every
// name to an index and assigns types; the kernel, checker and emitter only
// accept validated models.

#include "coda/diagnostics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace coda {

using Value = std::int64_t;
using Time = std::int64_t;

inline constexpr Value kDefaultIntBound = 2147483647; // 2^31 - 1

enum class BaseType { Bool, Nat, Int, Set };

struct ValueType
{
    BaseType base = BaseType::Bool;
    std::string set_name; // BaseType::Set only
    int set_index = -1;   // resolved carrier set (global index)

    static ValueType boolean() { return {BaseType::Bool, {}, -1}; }
    static ValueType nat() { return {BaseType::Nat, {}, -1}; }
    static ValueType integer() { return {BaseType::Int, {}, -1}; }
    static ValueType set(std::string name) { return {BaseType::Set, std::move(name), -1}; }

    [[nodiscard]] bool numeric() const { return base == BaseType::Nat || base == BaseType::Int; }
    [[nodiscard]] std::string str() const;

    friend bool operator==(const ValueType& a, const ValueType& b)
    {
        return a.base == b.base && a.set_name == b.set_name;
    }
};

// Values assignable to a slot of type `to`: numeric types interconvert
// (with a runtime range check for NAT), everything else must match exactly.
[[nodiscard]] bool assignable(const ValueType& to, const ValueType& from);

// ---------------------------------------------------------------------------
// Expressions

enum class ExprKind { BoolLit, IntLit, Name, InState, Recv, Unary, Binary, MinMax };
enum class UnOp { Not, Neg };
enum class BinOp { Add, Sub, Mul, Eq, Ne, Lt, Le, Gt, Ge, And, Or, Implies, Iff };

// What a Name resolved to.
enum class RefKind { Unresolved, Var, Param, Const, Element };

struct Expr
{
    ExprKind kind = ExprKind::BoolLit;
    Value literal = 0;
    // Name / InState / Recv: dotted path as written, without a leading `abs`.
    std::vector<std::string> path;
    bool abstract_side = false; // written `abs.X...` (gluing expressions only)
    UnOp un = UnOp::Not;
    BinOp bin = BinOp::Add;
    bool is_max = false; // MinMax
    std::vector<Expr> args;
    SourceSpan span;

    // Filled by validation.
    RefKind ref = RefKind::Unresolved;
    int comp = -1;    // Var: owning component; InState: component
    int index = -1;   // Var/Param/Const index, Element: element index, Recv: connector
    int machine = -1; // InState: machine (component-local)
    int state = -1;   // InState: state (machine-local)
    ValueType type;

    static Expr boolean(bool b);
    static Expr number(Value v);
    static Expr name(std::vector<std::string> path);
    static Expr unary(UnOp op, Expr e);
    static Expr binary(BinOp op, Expr l, Expr r);

    // Structural equality on the as-written tree (resolution ignored).
    friend bool operator==(const Expr& a, const Expr& b);
};

[[nodiscard]] std::string to_string(const Expr& e);
[[nodiscard]] const char* to_string(BinOp op);

// ---------------------------------------------------------------------------
// Contexts

struct CarrierSet
{
    std::string name;
    std::vector<std::string> elements;
    SourceSpan span;
    friend bool operator==(const CarrierSet&, const CarrierSet&) = default;
};

struct Constant
{
    std::string name;
    ValueType type;
    Expr value;
    Value resolved = 0;
    SourceSpan span;
    friend bool operator==(const Constant& a, const Constant& b)
    {
        return a.name == b.name && a.type == b.type && a.value == b.value;
    }
};

struct Context
{
    std::string name;
    std::string extends;
    std::vector<CarrierSet> sets;
    std::vector<Constant> constants;
    std::vector<Expr> axioms;
    SourceSpan span;
    friend bool operator==(const Context&, const Context&) = default;
};

// ---------------------------------------------------------------------------
// Components

struct Connector
{
    std::string name;
    ValueType type;
    std::string source;
    std::string target;
    SourceSpan span;
    int source_comp = -1;
    int target_comp = -1;
    friend bool operator==(const Connector& a, const Connector& b)
    {
        return a.name == b.name && a.type == b.type && a.source == b.source && a.target == b.target;
    }
};

enum class OpKind { P, S, E, T, M };

[[nodiscard]] char kind_letter(OpKind k);
[[nodiscard]] std::optional<OpKind> kind_from_letter(const std::string& s);

enum class WakeKind { Default };

struct Param
{
    std::string name;
    ValueType type;
    std::optional<Value> lo; // required for NAT/INT parameters
    std::optional<Value> hi;
    SourceSpan span;
    friend bool operator==(const Param& a, const Param& b)
    {
        return a.name == b.name && a.type == b.type && a.lo == b.lo && a.hi == b.hi;
    }
};

enum class ActionKind { Assign, PortSend, SelfWake, Call };

struct Action
{
    ActionKind kind = ActionKind::Assign;
    std::string target; // variable, connector or method name
    Expr value;         // Assign / PortSend
    Expr delay;         // PortSend / SelfWake
    SourceSpan span;
    int index = -1; // resolved variable / connector / method (component-local op)

    friend bool operator==(const Action& a, const Action& b)
    {
        return a.kind == b.kind && a.target == b.target && a.value == b.value && a.delay == b.delay;
    }
};

struct Operation
{
    std::string name;
    OpKind kind = OpKind::E;
    std::vector<std::string> wakes;
    std::vector<Param> params;
    std::vector<Expr> guards;
    std::vector<Action> actions;
    SourceSpan span;
    std::vector<int> wake_ids; // resolved connectors, sorted

    friend bool operator==(const Operation& a, const Operation& b)
    {
        return a.name == b.name && a.kind == b.kind && a.wakes == b.wakes && a.params == b.params &&
               a.guards == b.guards && a.actions == b.actions;
    }
};

// States are stored flat; `parent` links rebuild the tree.
struct State
{
    std::string name;
    int parent = -1;
    std::string initial; // composite states: initial substate
    std::vector<Expr> invariants;
    SourceSpan span;
    std::vector<int> children;
    int initial_child = -1;

    friend bool operator==(const State& a, const State& b)
    {
        return a.name == b.name && a.parent == b.parent && a.initial == b.initial &&
               a.invariants == b.invariants && a.children == b.children;
    }
};

struct Transition
{
    std::string name;
    std::string source; // empty: the machine's initial transition
    std::string target;
    std::string link; // linked operation (component-local), optional
    std::vector<Expr> guards;
    std::vector<Action> actions;
    SourceSpan span;
    int src = -1; // -1: from the inactive pseudo-state
    int tgt = -1;
    int link_op = -1;

    [[nodiscard]] bool is_initial() const { return source.empty(); }

    friend bool operator==(const Transition& a, const Transition& b)
    {
        return a.name == b.name && a.source == b.source && a.target == b.target && a.link == b.link &&
               a.guards == b.guards && a.actions == b.actions;
    }
};

enum class MachineMode { Sync, Async };

struct StateMachine
{
    std::string name;
    MachineMode mode = MachineMode::Async;
    std::vector<State> states;
    // A machine whose initial transition is linked to an operation starts
    // inactive; that transition is kept in `transitions` with an empty source.
    std::string initial;
    std::string initial_link;
    std::vector<Transition> transitions;
    SourceSpan span;
    int initial_state = -1;

    [[nodiscard]] int find_state(const std::string& name) const;
    // True when `ancestor` is `s` or encloses it.
    [[nodiscard]] bool within(int s, int ancestor) const;
    // Descends initial substates until a leaf.
    [[nodiscard]] int enter(int s) const;

    friend bool operator==(const StateMachine& a, const StateMachine& b)
    {
        return a.name == b.name && a.mode == b.mode && a.states == b.states && a.initial == b.initial &&
               a.initial_link == b.initial_link && a.transitions == b.transitions;
    }
};

struct Variable
{
    std::string name;
    ValueType type;
    Expr init;
    SourceSpan span;
    Value initial = 0;
    friend bool operator==(const Variable& a, const Variable& b)
    {
        return a.name == b.name && a.type == b.type && a.init == b.init;
    }
};

struct Component
{
    std::string name;
    std::vector<Variable> vars;
    std::optional<Expr> variant;
    std::vector<Expr> invariants;
    std::vector<StateMachine> machines;
    std::vector<Operation> operations;
    SourceSpan span;

    [[nodiscard]] int find_var(const std::string& n) const;
    [[nodiscard]] int find_op(const std::string& n) const;
    [[nodiscard]] int find_machine(const std::string& n) const;

    friend bool operator==(const Component& a, const Component& b)
    {
        return a.name == b.name && a.vars == b.vars && a.variant == b.variant && a.invariants == b.invariants &&
               a.machines == b.machines && a.operations == b.operations;
    }
};

// ---------------------------------------------------------------------------
// Refinement declaration (inline `refines` block or `.refines` file)

struct EventMapping
{
    std::string concrete; // "C.op" or "C.sm.t"
    std::string abstract; // same form, or "new"
    SourceSpan span;
    friend bool operator==(const EventMapping&, const EventMapping&) = default;
};

struct StateMapping
{
    std::string concrete; // "C.sm.S"
    std::string abstract; // abstract state name
    SourceSpan span;
    friend bool operator==(const StateMapping&, const StateMapping&) = default;
};

struct RefinesDecl
{
    std::string path;
    std::vector<EventMapping> events;
    std::vector<StateMapping> states;
    std::vector<Expr> glue;
    SourceSpan span;
    friend bool operator==(const RefinesDecl&, const RefinesDecl&) = default;
};

struct Model
{
    std::string name;
    std::optional<RefinesDecl> refines;
    std::vector<Context> contexts;
    std::vector<Connector> connectors;
    std::vector<Component> components;
    std::string file; // source path, if loaded from disk
    bool validated = false;

    [[nodiscard]] int find_component(const std::string& n) const;
    [[nodiscard]] int find_connector(const std::string& n) const;

    // Flattened views of the contexts, built by validation.
    struct SetInfo
    {
        std::string name;
        std::vector<std::string> elements;
    };
    struct ConstInfo
    {
        std::string name;
        ValueType type;
        Value value = 0;
    };
    std::vector<SetInfo> sets;
    std::vector<ConstInfo> consts;

    friend bool operator==(const Model& a, const Model& b)
    {
        return a.name == b.name && a.refines == b.refines && a.contexts == b.contexts &&
               a.connectors == b.connectors && a.components == b.components;
    }
};

// Renders a value of the given type the way the DSL writes it
// (TRUE/FALSE, integers, carrier-set element names).
[[nodiscard]] std::string render_value(const Model& m, const ValueType& t, Value v);
// Inverse of render_value; nullopt when the text is not a value of `t`.
[[nodiscard]] std::optional<Value> parse_value(const Model& m, const ValueType& t, const std::string& text);

// Every value of a finite type (BOOL, carrier set, or a ranged number).
[[nodiscard]] std::vector<Value> domain_of(const Model& m, const ValueType& t, std::optional<Value> lo = {},
                                           std::optional<Value> hi = {});

} // namespace coda
