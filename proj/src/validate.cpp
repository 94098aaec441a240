#include "coda/validate.hpp"

#include "coda/eval.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace coda {

void throw_overflow(const Expr& e, Value bound)
{
    throw Error("Overflow", e.span.str() + ": value of `" + to_string(e) + "` exceeds integer bound " +
                                std::to_string(bound));
}

namespace {

enum class ScopeKind {
    Operation,  // guards and actions of an operation or linked transition
    Invariant,  // component and state invariants: may read other components
    Constant,   // constant values, variable initialisers, axioms
    Variant,
    Joint,      // gluing expressions over a concrete/abstract pair
};

struct Scope
{
    ScopeKind kind = ScopeKind::Operation;
    int comp = -1;
    const Operation* op = nullptr;   // parameters in scope
    const Model* abstract = nullptr; // Joint only
};

// Evaluates constant expressions (constants, elements, literals).
struct ConstEnv
{
    Value limit;
    Value var(const Expr&) const { return 0; }
    Value param(int) const { return 0; }
    std::optional<Value> recv(int) const { return std::nullopt; }
    bool in_state(const Expr&) const { return false; }
    Value bound() const { return limit; }
};

class Validator
{
public:
    Validator(Model& m, const ValidateOptions& opts, Diagnostics& out) : m_(m), opts_(opts), out_(out) {}

    void run()
    {
        m_.validated = false;
        contexts();
        connectors();
        components();
        if (!has_errors(out_))
            m_.validated = true;
    }

    // Resolves `e` in scope; returns false (with diagnostics) on failure.
    bool resolve(Expr& e, const Scope& sc, const Model& target_model);

    bool resolve(Expr& e, const Scope& sc) { return resolve(e, sc, m_); }

    void expect_bool(Expr& e, const Scope& sc, const char* what)
    {
        if (resolve(e, sc) && e.type.base != BaseType::Bool)
            error("TypeMismatch", e.span, std::string(what) + " `" + to_string(e) + "` must be BOOL, is " + e.type.str());
    }

    void error(const std::string& code, const SourceSpan& span, const std::string& msg)
    {
        out_.push_back({Severity::Error, code, msg, span});
    }

    void warning(const std::string& code, const SourceSpan& span, const std::string& msg)
    {
        out_.push_back({Severity::Warning, code, msg, span});
    }

private:
    bool resolve_type(ValueType& t, const SourceSpan& span)
    {
        if (t.base != BaseType::Set)
            return true;
        for (size_t i = 0; i < m_.sets.size(); ++i)
            if (m_.sets[i].name == t.set_name) {
                t.set_index = static_cast<int>(i);
                return true;
            }
        error("UnresolvedName", span, "unknown type `" + t.set_name + "`");
        return false;
    }

    void declare_global(const std::string& name, const SourceSpan& span, const char* what)
    {
        auto [it, fresh] = globals_.emplace(name, what);
        if (!fresh)
            error("DuplicateDeclaration", span, std::string(what) + " `" + name + "` clashes with " + it->second + " of the same name");
    }

    std::optional<Value> fold(const Expr& e)
    {
        try {
            return evaluate(m_, e, ConstEnv{opts_.int_bound});
        } catch (const Error& err) {
            error(err.code(), e.span, err.what());
            return std::nullopt;
        }
    }

    void check_literal_range(const Expr& e)
    {
        if (e.kind == ExprKind::IntLit && (e.literal > opts_.int_bound || e.literal < -opts_.int_bound))
            warning("OverflowRisk", e.span, "literal " + std::to_string(e.literal) + " exceeds integer bound");
        for (const auto& a : e.args)
            check_literal_range(a);
    }

    void contexts();
    void connectors();
    void components();
    void component(int ci);
    void machine(int ci, StateMachine& sm);
    void operation(int ci, Operation& op);
    void actions(int ci, std::vector<Action>& acts, const Scope& sc, std::set<std::string>& assigned);

    Model& m_;
    const ValidateOptions& opts_;
    Diagnostics& out_;
    std::map<std::string, std::string> globals_; // global name -> kind
};

bool Validator::resolve(Expr& e, const Scope& sc, const Model& tm)
{
    check_literal_range(e);
    // Resolution of abstract-side references happens against sc.abstract.
    const Model& vm = (sc.kind == ScopeKind::Joint && e.abstract_side && sc.abstract) ? *sc.abstract : tm;
    if (e.abstract_side && sc.kind != ScopeKind::Joint) {
        error("IllegalActionPlacement", e.span, "`abs.` references are only legal in gluing expressions");
        return false;
    }
    switch (e.kind) {
    case ExprKind::BoolLit:
        e.type = ValueType::boolean();
        return true;
    case ExprKind::IntLit:
        e.type = e.literal >= 0 ? ValueType::nat() : ValueType::integer();
        return true;
    case ExprKind::Name: {
        e.ref = RefKind::Unresolved;
        const auto& p = e.path;
        if (p.size() == 2 || (p.size() == 1 && sc.kind == ScopeKind::Joint && e.abstract_side)) {
            // Qualified variable C.x
            if (p.size() != 2) {
                error("UnresolvedName", e.span, "abstract references must be qualified: `abs.C.x`");
                return false;
            }
            const int c = vm.find_component(p[0]);
            if (c < 0) {
                error("UnresolvedName", e.span, "unknown component `" + p[0] + "` in `" + to_string(e) + "`");
                return false;
            }
            if (sc.kind != ScopeKind::Invariant && sc.kind != ScopeKind::Joint && c != sc.comp) {
                error("IllegalActionPlacement", e.span,
                      "`" + to_string(e) + "` reads another component's variable; only invariants may do that");
                return false;
            }
            if (sc.kind == ScopeKind::Constant) {
                error("IllegalActionPlacement", e.span, "variables cannot appear in constant expressions");
                return false;
            }
            const int v = vm.components[c].find_var(p[1]);
            if (v < 0) {
                error("UnresolvedName", e.span, "component `" + p[0] + "` has no variable `" + p[1] + "`");
                return false;
            }
            e.ref = RefKind::Var;
            e.comp = c;
            e.index = v;
            e.type = vm.components[c].vars[v].type;
            return true;
        }
        if (p.size() != 1) {
            error("UnresolvedName", e.span, "cannot resolve `" + to_string(e) + "`");
            return false;
        }
        const std::string& n = p[0];
        int hits = 0;
        if (sc.comp >= 0 && sc.kind != ScopeKind::Constant) {
            const int v = m_.components[sc.comp].find_var(n);
            if (v >= 0) {
                ++hits;
                e.ref = RefKind::Var;
                e.comp = sc.comp;
                e.index = v;
                e.type = m_.components[sc.comp].vars[v].type;
            }
        }
        if (sc.op) {
            for (size_t i = 0; i < sc.op->params.size(); ++i)
                if (sc.op->params[i].name == n) {
                    ++hits;
                    e.ref = RefKind::Param;
                    e.index = static_cast<int>(i);
                    e.type = sc.op->params[i].type;
                }
        }
        for (size_t i = 0; i < m_.consts.size(); ++i)
            if (m_.consts[i].name == n) {
                ++hits;
                e.ref = RefKind::Const;
                e.index = static_cast<int>(i);
                e.type = m_.consts[i].type;
            }
        for (size_t s = 0; s < m_.sets.size(); ++s) {
            const auto& els = m_.sets[s].elements;
            for (size_t i = 0; i < els.size(); ++i)
                if (els[i] == n) {
                    ++hits;
                    e.ref = RefKind::Element;
                    e.index = static_cast<int>(i);
                    e.type = ValueType::set(m_.sets[s].name);
                    e.type.set_index = static_cast<int>(s);
                }
        }
        if (hits == 0) {
            if (sc.kind == ScopeKind::Joint)
                error("UnresolvedName", e.span, "unknown name `" + n + "` (gluing variables are written `C.x` / `abs.C.x`)");
            else
                error("UnresolvedName", e.span, "unknown name `" + n + "`");
            e.ref = RefKind::Unresolved;
            return false;
        }
        if (hits > 1) {
            error("UnresolvedName", e.span, "ambiguous name `" + n + "` resolves in more than one scope");
            e.ref = RefKind::Unresolved;
            return false;
        }
        return true;
    }
    case ExprKind::InState: {
        e.type = ValueType::boolean();
        if (sc.kind == ScopeKind::Constant || sc.kind == ScopeKind::Variant) {
            error("IllegalActionPlacement", e.span, "state tests are not allowed here");
            return false;
        }
        const auto& p = e.path;
        // Candidate (component, machine, state) triples matching the path.
        std::vector<std::array<int, 3>> hits;
        auto scan = [&](int c, const std::string* sm_name, const std::string& st) {
            const auto& comp = vm.components[c];
            for (size_t mi = 0; mi < comp.machines.size(); ++mi) {
                if (sm_name && comp.machines[mi].name != *sm_name)
                    continue;
                const int s = comp.machines[mi].find_state(st);
                if (s >= 0)
                    hits.push_back({c, static_cast<int>(mi), s});
            }
        };
        if (p.size() == 1) {
            if (sc.comp >= 0 && sc.kind != ScopeKind::Joint)
                scan(sc.comp, nullptr, p[0]);
            if (hits.empty() && (sc.kind == ScopeKind::Invariant))
                for (size_t c = 0; c < vm.components.size(); ++c)
                    scan(static_cast<int>(c), nullptr, p[0]);
        } else if (p.size() == 2) {
            const int c = vm.find_component(p[0]);
            if (c >= 0)
                scan(c, nullptr, p[1]);
            if (sc.comp >= 0 && sc.kind != ScopeKind::Joint && !e.abstract_side)
                scan(sc.comp, &p[0], p[1]);
        } else if (p.size() == 3) {
            const int c = vm.find_component(p[0]);
            if (c >= 0)
                scan(c, &p[1], p[2]);
        }
        if (hits.empty()) {
            error("UnresolvedName", e.span, "unknown state in `" + to_string(e) + "`");
            return false;
        }
        if (hits.size() > 1) {
            error("UnresolvedName", e.span, "ambiguous state in `" + to_string(e) + "`; qualify it with its machine");
            return false;
        }
        if (sc.kind == ScopeKind::Operation && hits[0][0] != sc.comp) {
            error("IllegalActionPlacement", e.span, "`" + to_string(e) + "` tests another component's state");
            return false;
        }
        e.comp = hits[0][0];
        e.machine = hits[0][1];
        e.state = hits[0][2];
        return true;
    }
    case ExprKind::Recv: {
        const int c = vm.find_connector(e.path.empty() ? "" : e.path[0]);
        if (c < 0 || e.path.size() != 1) {
            error("UnresolvedName", e.span, "unknown connector in `" + to_string(e) + "`");
            return false;
        }
        if (sc.kind != ScopeKind::Operation) {
            error("IllegalActionPlacement", e.span, "`" + to_string(e) + "` is only legal in operation guards and actions");
            return false;
        }
        if (vm.connectors[c].target_comp != sc.comp) {
            error("IllegalActionPlacement", e.span,
                  "`" + to_string(e) + "`: connector `" + vm.connectors[c].name + "` does not target component `" +
                      m_.components[sc.comp].name + "`");
            return false;
        }
        e.index = c;
        e.type = vm.connectors[c].type;
        return true;
    }
    case ExprKind::Unary: {
        if (!resolve(e.args[0], sc, tm))
            return false;
        const auto& t = e.args[0].type;
        if (e.un == UnOp::Not) {
            if (t.base != BaseType::Bool) {
                error("TypeMismatch", e.span, "`not` expects BOOL in `" + to_string(e) + "`, got " + t.str());
                return false;
            }
            e.type = ValueType::boolean();
        } else {
            if (!t.numeric()) {
                error("TypeMismatch", e.span, "unary `-` expects a number in `" + to_string(e) + "`, got " + t.str());
                return false;
            }
            e.type = ValueType::integer();
        }
        return true;
    }
    case ExprKind::MinMax: {
        bool ok = !e.args.empty();
        bool all_nat = true;
        for (auto& a : e.args) {
            if (!resolve(a, sc, tm)) {
                ok = false;
                continue;
            }
            if (!a.type.numeric()) {
                error("TypeMismatch", a.span, "`" + to_string(a) + "` in `" + to_string(e) + "` is not a number");
                ok = false;
            }
            all_nat = all_nat && a.type.base == BaseType::Nat;
        }
        e.type = all_nat ? ValueType::nat() : ValueType::integer();
        return ok;
    }
    case ExprKind::Binary: {
        const bool okl = resolve(e.args[0], sc, tm);
        const bool okr = resolve(e.args[1], sc, tm);
        if (!okl || !okr)
            return false;
        const auto& l = e.args[0].type;
        const auto& r = e.args[1].type;
        auto mismatch = [&](const char* expect) {
            error("TypeMismatch", e.span,
                  std::string("`") + to_string(e) + "`: operands of `" + to_string(e.bin) + "` must be " + expect +
                      ", got " + l.str() + " and " + r.str());
            return false;
        };
        switch (e.bin) {
        case BinOp::Add:
        case BinOp::Mul:
            if (!l.numeric() || !r.numeric())
                return mismatch("numbers");
            e.type = (l.base == BaseType::Nat && r.base == BaseType::Nat) ? ValueType::nat() : ValueType::integer();
            return true;
        case BinOp::Sub:
            if (!l.numeric() || !r.numeric())
                return mismatch("numbers");
            e.type = ValueType::integer();
            return true;
        case BinOp::Lt:
        case BinOp::Le:
        case BinOp::Gt:
        case BinOp::Ge:
            if (!l.numeric() || !r.numeric())
                return mismatch("numbers");
            e.type = ValueType::boolean();
            return true;
        case BinOp::Eq:
        case BinOp::Ne:
            if (!assignable(l, r))
                return mismatch("of the same type");
            e.type = ValueType::boolean();
            return true;
        case BinOp::And:
        case BinOp::Or:
        case BinOp::Implies:
        case BinOp::Iff:
            if (l.base != BaseType::Bool || r.base != BaseType::Bool)
                return mismatch("BOOL");
            e.type = ValueType::boolean();
            return true;
        }
        return false;
    }
    }
    return false;
}

void Validator::contexts()
{
    m_.sets.clear();
    m_.consts.clear();
    std::set<std::string> ctx_names;
    for (const auto& ctx : m_.contexts)
        if (!ctx_names.insert(ctx.name).second)
            error("DuplicateDeclaration", ctx.span, "context `" + ctx.name + "` declared twice");
    for (const auto& ctx : m_.contexts)
        if (!ctx.extends.empty() && !ctx_names.count(ctx.extends))
            error("UnresolvedName", ctx.span, "context `" + ctx.name + "` extends unknown context `" + ctx.extends + "`");

    for (auto& ctx : m_.contexts)
        for (auto& s : ctx.sets) {
            declare_global(s.name, s.span, "set");
            if (s.elements.empty())
                error("TypeMismatch", s.span, "carrier set `" + s.name + "` must be nonempty");
            for (const auto& el : s.elements)
                declare_global(el, s.span, "set element");
            m_.sets.push_back({s.name, s.elements});
        }
    for (auto& ctx : m_.contexts)
        for (auto& c : ctx.constants) {
            declare_global(c.name, c.span, "constant");
            resolve_type(c.type, c.span);
            Scope sc{ScopeKind::Constant};
            std::optional<Value> v;
            if (resolve(c.value, sc)) {
                if (!assignable(c.type, c.value.type))
                    error("TypeMismatch", c.span,
                          "constant `" + c.name + "` declared " + c.type.str() + " but its value has type " + c.value.type.str());
                else
                    v = fold(c.value);
            }
            if (v && c.type.base == BaseType::Nat && *v < 0)
                error("TypeMismatch", c.span, "constant `" + c.name + "` is NAT but evaluates to " + std::to_string(*v));
            c.resolved = v.value_or(0);
            m_.consts.push_back({c.name, c.type, c.resolved});
        }
    for (auto& ctx : m_.contexts)
        for (auto& ax : ctx.axioms) {
            Scope sc{ScopeKind::Constant};
            expect_bool(ax, sc, "axiom");
            if (ax.type.base == BaseType::Bool && !has_errors(out_)) {
                auto v = fold(ax);
                if (v && !*v)
                    error("AxiomViolated", ax.span, "axiom `" + to_string(ax) + "` does not hold");
            }
        }
}

void Validator::connectors()
{
    for (auto& c : m_.connectors) {
        declare_global(c.name, c.span, "connector");
        resolve_type(c.type, c.span);
        c.source_comp = m_.find_component(c.source);
        c.target_comp = m_.find_component(c.target);
        if (c.source_comp < 0)
            error("UnresolvedName", c.span, "connector `" + c.name + "`: unknown source component `" + c.source + "`");
        if (c.target_comp < 0)
            error("UnresolvedName", c.span, "connector `" + c.name + "`: unknown target component `" + c.target + "`");
        if (c.source_comp >= 0 && c.source_comp == c.target_comp)
            error("IllegalActionPlacement", c.span, "connector `" + c.name + "` connects component `" + c.source + "` to itself");
    }
}

void Validator::components()
{
    std::set<std::string> names;
    for (const auto& c : m_.components) {
        if (!names.insert(c.name).second)
            error("DuplicateDeclaration", c.span, "component `" + c.name + "` declared twice");
        declare_global(c.name, c.span, "component");
    }
    for (size_t ci = 0; ci < m_.components.size(); ++ci)
        component(static_cast<int>(ci));

    // Connectors nobody listens to block time once a value arrives.
    for (size_t k = 0; k < m_.connectors.size(); ++k) {
        const auto& c = m_.connectors[k];
        if (c.target_comp < 0)
            continue;
        bool heard = false;
        for (const auto& op : m_.components[c.target_comp].operations)
            if (op.kind == OpKind::P && std::count(op.wakes.begin(), op.wakes.end(), c.name))
                heard = true;
        if (!heard)
            warning("UndeliverableConnector", c.span,
                    "no port-wake operation of `" + c.target + "` responds to connector `" + c.name +
                        "`; a delivery on it blocks the clock");
    }
}

void Validator::component(int ci)
{
    auto& comp = m_.components[ci];
    std::set<std::string> local;
    for (auto& v : comp.vars) {
        if (!local.insert(v.name).second)
            error("DuplicateDeclaration", v.span, "variable `" + v.name + "` declared twice in `" + comp.name + "`");
        resolve_type(v.type, v.span);
        Scope sc{ScopeKind::Constant, ci};
        if (resolve(v.init, sc)) {
            if (!assignable(v.type, v.init.type))
                error("TypeMismatch", v.span,
                      "variable `" + v.name + "` is " + v.type.str() + " but is initialised with " + v.init.type.str());
            else if (auto x = fold(v.init)) {
                v.initial = *x;
                if (v.type.base == BaseType::Nat && *x < 0)
                    error("TypeMismatch", v.span, "NAT variable `" + v.name + "` initialised to " + std::to_string(*x));
            }
        }
    }
    std::set<std::string> opnames;
    for (const auto& op : comp.operations)
        if (!opnames.insert(op.name).second)
            error("DuplicateDeclaration", op.span, "operation `" + op.name + "` declared twice in `" + comp.name + "`");
    std::set<std::string> smnames;
    for (const auto& sm : comp.machines)
        if (!smnames.insert(sm.name).second)
            error("DuplicateDeclaration", sm.span, "state machine `" + sm.name + "` declared twice in `" + comp.name + "`");

    for (auto& sm : comp.machines)
        machine(ci, sm);
    for (auto& op : comp.operations)
        operation(ci, op);

    if (comp.variant) {
        Scope sc{ScopeKind::Variant, ci};
        if (resolve(*comp.variant, sc) && !comp.variant->type.numeric())
            error("TypeMismatch", comp.variant->span, "variant of `" + comp.name + "` must be a number");
    }
    for (auto& inv : comp.invariants) {
        Scope sc{ScopeKind::Invariant, ci};
        expect_bool(inv, sc, "invariant");
    }
}

void Validator::machine(int ci, StateMachine& sm)
{
    auto& comp = m_.components[ci];
    std::set<std::string> names;
    for (size_t i = 0; i < sm.states.size(); ++i) {
        auto& st = sm.states[i];
        if (!names.insert(st.name).second)
            error("DuplicateDeclaration", st.span, "state `" + st.name + "` declared twice in machine `" + sm.name + "`");
    }
    for (auto& st : sm.states) {
        st.initial_child = -1;
        if (!st.children.empty()) {
            if (st.initial.empty())
                st.initial_child = st.children.front();
            else {
                const int s = sm.find_state(st.initial);
                if (s < 0 || sm.states[s].parent != &st - sm.states.data())
                    error("UnresolvedName", st.span, "initial substate `" + st.initial + "` is not a child of `" + st.name + "`");
                else
                    st.initial_child = s;
            }
        } else if (!st.initial.empty()) {
            error("UnresolvedName", st.span, "state `" + st.name + "` has no substates but names an initial one");
        }
        for (auto& inv : st.invariants) {
            Scope sc{ScopeKind::Invariant, ci};
            expect_bool(inv, sc, "state invariant");
        }
    }
    sm.initial_state = sm.find_state(sm.initial);
    if (sm.initial_state < 0)
        error("UnresolvedName", sm.span, "machine `" + sm.name + "` has no valid initial state (`" + sm.initial + "`)");
    else if (sm.states[sm.initial_state].parent != -1)
        error("UnresolvedName", sm.span, "initial state `" + sm.initial + "` of `" + sm.name + "` must be top-level");

    std::set<std::string> tnames;
    for (auto& t : sm.transitions) {
        if (!tnames.insert(t.name).second)
            error("DuplicateDeclaration", t.span, "transition `" + t.name + "` declared twice in `" + sm.name + "`");
        t.src = t.is_initial() ? -1 : sm.find_state(t.source);
        t.tgt = sm.find_state(t.target);
        if (!t.is_initial() && t.src < 0)
            error("UnresolvedName", t.span, "transition `" + t.name + "`: unknown source state `" + t.source + "`");
        if (t.tgt < 0)
            error("UnresolvedName", t.span, "transition `" + t.name + "`: unknown target state `" + t.target + "`");
        else if (sm.enter(t.tgt) < 0)
            error("UnresolvedName", t.span, "transition `" + t.name + "` enters composite state without an initial substate");
        t.link_op = -1;
        const Operation* op = nullptr;
        if (!t.link.empty()) {
            t.link_op = comp.find_op(t.link);
            if (t.link_op < 0)
                error("UnresolvedName", t.span, "transition `" + t.name + "` links unknown operation `" + t.link + "`");
            else {
                op = &comp.operations[t.link_op];
                if (op->kind == OpKind::E && sm.mode == MachineMode::Sync)
                    error("KindConstraintViolation", t.span,
                          "environment operation `" + op->name + "` cannot be linked to synchronous machine `" + sm.name + "`");
            }
        } else if (t.is_initial()) {
            error("UnresolvedName", t.span, "initial transition must be linked to an operation");
        }
        Scope sc{ScopeKind::Operation, ci, op};
        for (auto& g : t.guards)
            expect_bool(g, sc, "transition guard");
        std::set<std::string> assigned;
        actions(ci, t.actions, sc, assigned);
    }
}

void Validator::operation(int ci, Operation& op)
{
    auto& comp = m_.components[ci];
    op.wake_ids.clear();
    if (op.kind == OpKind::P) {
        if (op.wakes.empty())
            error("KindConstraintViolation", op.span, "port-wake operation `" + op.name + "` must wake on at least one connector");
        std::set<std::string> seen;
        for (const auto& w : op.wakes) {
            if (!seen.insert(w).second)
                error("DuplicateDeclaration", op.span, "operation `" + op.name + "` lists connector `" + w + "` twice");
            const int c = m_.find_connector(w);
            if (c < 0) {
                error("UnresolvedName", op.span, "operation `" + op.name + "` wakes on unknown connector `" + w + "`");
                continue;
            }
            if (m_.connectors[c].target_comp != ci)
                error("IllegalActionPlacement", op.span,
                      "port-wake operation `" + comp.name + "." + op.name + "` wakes on connector `" + w +
                          "` whose target is `" + m_.connectors[c].target + "`");
            op.wake_ids.push_back(c);
        }
        std::sort(op.wake_ids.begin(), op.wake_ids.end());
    } else if (!op.wakes.empty()) {
        error("KindConstraintViolation", op.span, "only port-wake (P) operations may declare `wakes`");
    }

    std::set<std::string> pnames;
    for (auto& p : op.params) {
        if (!pnames.insert(p.name).second)
            error("DuplicateDeclaration", p.span, "parameter `" + p.name + "` declared twice");
        if (op.kind != OpKind::E && op.kind != OpKind::T)
            error("KindConstraintViolation", p.span,
                  "only environment (E) and transition (T) operations take parameters; `" + op.name + "` is " +
                      kind_letter(op.kind));
        resolve_type(p.type, p.span);
        if (p.type.numeric()) {
            if (!p.lo || !p.hi)
                error("UnboundedParameter", p.span,
                      "numeric parameter `" + p.name + "` needs a finite range (`in lo..hi`) for bounded checking");
            else if (*p.lo > *p.hi || (p.type.base == BaseType::Nat && *p.lo < 0))
                error("TypeMismatch", p.span, "parameter `" + p.name + "` has an empty or negative range");
        }
    }

    Scope sc{ScopeKind::Operation, ci, &op};
    for (auto& g : op.guards)
        expect_bool(g, sc, "guard");
    std::set<std::string> assigned;
    actions(ci, op.actions, sc, assigned);
}

void Validator::actions(int ci, std::vector<Action>& acts, const Scope& sc, std::set<std::string>& assigned)
{
    auto& comp = m_.components[ci];
    auto check_delay = [&](Action& a) {
        if (resolve(a.delay, sc) && !a.delay.type.numeric())
            error("TypeMismatch", a.span, "delay `" + to_string(a.delay) + "` must be a natural number");
    };
    for (auto& a : acts) {
        switch (a.kind) {
        case ActionKind::Assign: {
            a.index = comp.find_var(a.target);
            if (a.index < 0) {
                error("UnresolvedName", a.span, "assignment to unknown variable `" + a.target + "` in `" + comp.name + "`");
                break;
            }
            if (!assigned.insert(a.target).second)
                error("DuplicateDeclaration", a.span, "variable `" + a.target + "` assigned twice in one event");
            if (resolve(a.value, sc) && !assignable(comp.vars[a.index].type, a.value.type))
                error("TypeMismatch", a.span,
                      "cannot assign " + a.value.type.str() + " to `" + a.target + "` of type " +
                          comp.vars[a.index].type.str());
            break;
        }
        case ActionKind::PortSend: {
            a.index = m_.find_connector(a.target);
            if (a.index < 0) {
                error("UnresolvedName", a.span, "port_send on unknown connector `" + a.target + "`");
                break;
            }
            const auto& c = m_.connectors[a.index];
            if (c.source_comp != ci)
                error("IllegalActionPlacement", a.span,
                      "component `" + comp.name + "` cannot port_send on `" + c.name + "`: its source is `" + c.source + "`");
            if (resolve(a.value, sc) && !assignable(c.type, a.value.type))
                error("TypeMismatch", a.span,
                      "port_send of " + a.value.type.str() + " on connector `" + c.name + "` of type " + c.type.str());
            check_delay(a);
            break;
        }
        case ActionKind::SelfWake:
            if (!a.target.empty() && a.target != "DEFAULT")
                error("KindConstraintViolation", a.span, "unsupported wake kind `" + a.target + "`; only DEFAULT exists");
            check_delay(a);
            break;
        case ActionKind::Call: {
            a.index = comp.find_op(a.target);
            if (a.index < 0)
                error("UnresolvedName", a.span, "call of unknown method `" + a.target + "` in `" + comp.name + "`");
            else if (comp.operations[a.index].kind != OpKind::M)
                error("IllegalActionPlacement", a.span, "`" + a.target + "` is not a method (M) operation");
            break;
        }
        }
    }
}

} // namespace

Diagnostics validate(Model& model, const ValidateOptions& opts)
{
    Diagnostics out;
    Validator v(model, opts, out);
    v.run();
    return out;
}

Model validated(Model raw, const ValidateOptions& opts)
{
    auto diags = validate(raw, opts);
    if (has_errors(diags))
        throw DiagnosticError(std::move(diags));
    return raw;
}

ValueType type_of(const Model& model, const std::string& component, const Expr& expr)
{
    Model scratch = model;
    Diagnostics out;
    Validator v(scratch, {}, out);
    const int ci = scratch.find_component(component);
    if (ci < 0)
        throw Error("UnresolvedName", "unknown component `" + component + "`");
    Expr copy = expr;
    Scope sc{ScopeKind::Operation, ci};
    if (!v.resolve(copy, sc))
        throw Error(out.front().code, out.front().message);
    return copy.type;
}

void resolve_joint(const Model& concrete, const Model& abstract, Expr& expr, Diagnostics& out)
{
    Model& scratch = const_cast<Model&>(concrete); // only read by the resolver
    Validator v(scratch, {}, out);
    Scope sc{ScopeKind::Joint, -1, nullptr, &abstract};
    if (v.resolve(expr, sc) && expr.type.base != BaseType::Bool)
        out.push_back({Severity::Error, "GluingIllTyped", "gluing `" + to_string(expr) + "` must be BOOL", expr.span});
}

} // namespace coda
