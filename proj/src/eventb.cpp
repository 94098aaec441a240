#include "coda/eventb.hpp"

#include "coda/loader.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace coda {

namespace {

// Identifiers chosen for one model.
struct Names
{
    const Model& m;
    std::vector<int> machine_base;                 // per component
    std::vector<const StateMachine*> machines;     // global
    std::vector<int> machine_comp;                 // global
    std::vector<std::string> sm_var;               // global
    std::vector<std::vector<std::string>> leaf;    // global -> state -> element ("" for composite)
    std::vector<std::string> off;                  // global -> inactive element, "" if never inactive
    std::set<std::string> taken;

    explicit Names(const Model& model) : m(model)
    {
        for (const auto& s : m.sets) {
            taken.insert(s.name);
            taken.insert(s.elements.begin(), s.elements.end());
        }
        for (const auto& c : m.consts)
            taken.insert(c.name);
        for (const auto& k : m.connectors)
            taken.insert(k.name);
        taken.insert({"current_time", "WakeKind", "DEFAULT"});
        for (const auto& c : m.components) {
            taken.insert(c.name + "_wakeup");
            for (const auto& v : c.vars)
                taken.insert(c.name + "_" + v.name);
        }
        std::map<std::string, int> sm_count, state_count;
        for (const auto& c : m.components)
            for (const auto& sm : c.machines) {
                ++sm_count[sm.name];
                for (const auto& st : sm.states)
                    ++state_count[st.name];
            }
        for (size_t ci = 0; ci < m.components.size(); ++ci) {
            const auto& c = m.components[ci];
            machine_base.push_back(static_cast<int>(machines.size()));
            for (const auto& sm : c.machines) {
                machines.push_back(&sm);
                machine_comp.push_back(static_cast<int>(ci));
                const bool plain = sm_count[sm.name] == 1 && !taken.count(sm.name);
                sm_var.push_back(plain ? sm.name : c.name + "_" + sm.name);
            }
        }
        for (const auto& v : sm_var)
            taken.insert(v);
        for (size_t g = 0; g < machines.size(); ++g) {
            const auto& sm = *machines[g];
            leaf.emplace_back(sm.states.size());
            for (size_t s = 0; s < sm.states.size(); ++s)
                if (sm.states[s].children.empty()) {
                    const auto& n = sm.states[s].name;
                    leaf[g][s] = state_count[n] == 1 && !taken.count(n) ? n : sm_var[g] + "_" + n;
                }
            off.push_back(sm.initial_link.empty() ? std::string() : sm_var[g] + "_OFF");
        }
    }

    int global(int comp, int machine) const { return machine_base[comp] + machine; }
    std::string var(int comp, int idx) const { return m.components[comp].name + "_" + m.components[comp].vars[idx].name; }
    std::string wakeup(int comp) const { return m.components[comp].name + "_wakeup"; }

    std::vector<std::string> leaves_within(int g, int s) const
    {
        std::vector<std::string> out;
        const auto& sm = *machines[g];
        for (size_t l = 0; l < sm.states.size(); ++l)
            if (!leaf[g][l].empty() && sm.within(static_cast<int>(l), s))
                out.push_back(leaf[g][l]);
        return out;
    }
    std::vector<std::string> all_leaves(int g) const
    {
        std::vector<std::string> out;
        if (!off[g].empty())
            out.push_back(off[g]);
        for (const auto& l : leaf[g])
            if (!l.empty())
                out.push_back(l);
        return out;
    }
    std::string states_set(int g) const { return sm_var[g] + "_STATES"; }
};

std::string join(const std::vector<std::string>& v, const std::string& sep)
{
    std::string out;
    for (size_t i = 0; i < v.size(); ++i)
        out += (i ? sep : "") + v[i];
    return out;
}

std::string member(const std::string& var, const std::vector<std::string>& elems)
{
    if (elems.size() == 1)
        return var + " = " + elems[0];
    return var + " ∈ {" + join(elems, ", ") + "}";
}

std::string type_text(const ValueType& t)
{
    switch (t.base) {
    case BaseType::Bool:
        return "BOOL";
    case BaseType::Nat:
        return "ℕ";
    case BaseType::Int:
        return "ℤ";
    case BaseType::Set:
        return t.set_name;
    }
    return "?";
}

std::string number(Value v)
{
    return v < 0 ? "−" + std::to_string(-v) : std::to_string(v);
}

// Expression translation. Abstract-side references (gluing only) go through
// `abs` with its own naming.
struct Render
{
    const Names& n;
    int comp = -1;
    const Names* abs = nullptr;
    std::function<std::string(const std::string&)> abs_rename = {};

    const Names& side(const Expr& e) const { return e.abstract_side && abs ? *abs : n; }

    std::string name_of(const Expr& e) const
    {
        switch (e.ref) {
        case RefKind::Var: {
            const std::string v = side(e).var(e.comp, e.index);
            return e.abstract_side && abs_rename ? abs_rename(v) : v;
        }
        case RefKind::Param:
        case RefKind::Const:
        case RefKind::Element:
            return e.path.back();
        case RefKind::Unresolved:
            break;
        }
        throw Error("UnsupportedConstruct", e.span.str() + ": unresolved name `" + to_string(e) + "`");
    }

    std::string in_state(const Expr& e) const
    {
        const Names& s = side(e);
        const int g = s.global(e.comp, e.machine);
        std::string var = s.sm_var[g];
        if (e.abstract_side && abs_rename)
            var = abs_rename(var);
        return member(var, s.leaves_within(g, e.state));
    }

    static bool is_pred_node(const Expr& e)
    {
        if (e.kind == ExprKind::InState || e.kind == ExprKind::BoolLit)
            return true;
        if (e.kind == ExprKind::Unary)
            return e.un == UnOp::Not;
        if (e.kind == ExprKind::Binary)
            return e.bin != BinOp::Add && e.bin != BinOp::Sub && e.bin != BinOp::Mul;
        return false;
    }

    std::string wrap_term(const Expr& e) const
    {
        const bool compound = (e.kind == ExprKind::Binary && !is_pred_node(e)) ||
                              (e.kind == ExprKind::Unary && e.un == UnOp::Neg);
        return compound ? "(" + term(e) + ")" : term(e);
    }
    std::string wrap_pred(const Expr& e) const
    {
        const bool compound = e.kind == ExprKind::Binary;
        return compound ? "(" + pred(e) + ")" : pred(e);
    }

    std::string term(const Expr& e) const
    {
        switch (e.kind) {
        case ExprKind::BoolLit:
            return e.literal ? "TRUE" : "FALSE";
        case ExprKind::IntLit:
            return number(e.literal);
        case ExprKind::Name:
            return name_of(e);
        case ExprKind::Recv:
            return e.path[0] + "_v";
        case ExprKind::MinMax: {
            std::vector<std::string> parts;
            for (const auto& a : e.args)
                parts.push_back(term(a));
            return std::string(e.is_max ? "max" : "min") + "({" + join(parts, ", ") + "})";
        }
        case ExprKind::Unary:
            if (e.un == UnOp::Neg)
                return "−" + wrap_term(e.args[0]);
            return "bool(" + pred(e) + ")";
        case ExprKind::Binary:
            if (is_pred_node(e))
                return "bool(" + pred(e) + ")";
            return wrap_term(e.args[0]) + (e.bin == BinOp::Add ? " + " : e.bin == BinOp::Sub ? " − " : " ∗ ") +
                   wrap_term(e.args[1]);
        case ExprKind::InState:
            return "bool(" + in_state(e) + ")";
        }
        return "?";
    }

    std::string pred(const Expr& e) const
    {
        switch (e.kind) {
        case ExprKind::BoolLit:
            return e.literal ? "⊤" : "⊥";
        case ExprKind::InState:
            return in_state(e);
        case ExprKind::Unary:
            if (e.un == UnOp::Not)
                return "¬(" + pred(e.args[0]) + ")";
            break;
        case ExprKind::Binary: {
            const char* op = nullptr;
            switch (e.bin) {
            case BinOp::Eq:
                op = " = ";
                break;
            case BinOp::Ne:
                op = " ≠ ";
                break;
            case BinOp::Lt:
                op = " < ";
                break;
            case BinOp::Le:
                op = " ≤ ";
                break;
            case BinOp::Gt:
                op = " > ";
                break;
            case BinOp::Ge:
                op = " ≥ ";
                break;
            default:
                break;
            }
            if (op)
                return term(e.args[0]) + op + term(e.args[1]);
            const char* conn = e.bin == BinOp::And       ? " ∧ "
                               : e.bin == BinOp::Or      ? " ∨ "
                               : e.bin == BinOp::Implies ? " ⇒ "
                               : e.bin == BinOp::Iff     ? " ⇔ "
                                                         : nullptr;
            if (conn)
                return wrap_pred(e.args[0]) + conn + wrap_pred(e.args[1]);
            break;
        }
        default:
            break;
        }
        return term(e) + " = TRUE";
    }
};

void collect_recv(const Expr& e, std::set<std::string>& out)
{
    if (e.kind == ExprKind::Recv)
        out.insert(e.path[0]);
    for (const auto& a : e.args)
        collect_recv(a, out);
}

void collect_recv(const std::vector<Action>& acts, std::set<std::string>& out)
{
    for (const auto& a : acts) {
        collect_recv(a.value, out);
        collect_recv(a.delay, out);
    }
}

struct Labeled
{
    std::string label;
    std::string text;
};

struct EventText
{
    std::string name;
    std::string status; // "", "convergent", "anticipated"
    std::string refines;
    std::vector<std::string> params;
    std::vector<Labeled> guards;
    std::vector<Labeled> actions;
};

// Sync flags and pending counters.
struct Bookkeeping
{
    std::map<std::pair<int, std::vector<int>>, std::string> p_flag; // (comp, wake set)
    std::map<int, std::string> s_flag;                              // comp
    std::map<std::pair<int, int>, std::string> m_flag;              // (comp, op)
    std::map<std::pair<int, int>, std::string> pending;             // (comp, op)
    std::map<int, std::string> sm_flag;                             // global machine (sync only)
    std::vector<std::string> flags;                                 // declaration order
    std::vector<std::string> counters;

    Bookkeeping(const Model& m, const Names& n)
    {
        for (size_t c = 0; c < m.components.size(); ++c) {
            const auto& comp = m.components[c];
            const int ci = static_cast<int>(c);
            for (size_t o = 0; o < comp.operations.size(); ++o) {
                const auto& op = comp.operations[o];
                const int oi = static_cast<int>(o);
                if (op.kind == OpKind::P) {
                    auto key = std::make_pair(ci, op.wake_ids);
                    if (!p_flag.count(key)) {
                        std::string f = comp.name + "_wake";
                        for (int k : op.wake_ids)
                            f += "_" + m.connectors[k].name;
                        p_flag[key] = f;
                        flags.push_back(f);
                    }
                } else if (op.kind == OpKind::S && !s_flag.count(ci)) {
                    s_flag[ci] = comp.name + "_selfwake";
                    flags.push_back(s_flag[ci]);
                } else if (op.kind == OpKind::M) {
                    m_flag[{ci, oi}] = comp.name + "_" + op.name + "_fired";
                    flags.push_back(m_flag[{ci, oi}]);
                    pending[{ci, oi}] = comp.name + "_" + op.name + "_pending";
                    counters.push_back(pending[{ci, oi}]);
                }
            }
            for (size_t mi = 0; mi < comp.machines.size(); ++mi)
                if (comp.machines[mi].mode == MachineMode::Sync) {
                    const int g = n.global(ci, static_cast<int>(mi));
                    sm_flag[g] = n.sm_var[g] + "_fired";
                    flags.push_back(sm_flag[g]);
                }
        }
    }
};

std::string event_id(const std::string& dotted)
{
    std::string out = dotted;
    std::replace(out.begin(), out.end(), '.', '_');
    return out;
}

class Emitter
{
public:
    explicit Emitter(const Model& m) : m_(m), n_(m), b_(m, n_) {}

    std::string context() const
    {
        std::ostringstream os;
        os << "context " << m_.name << "_ctx\n";
        os << "sets\n";
        for (const auto& s : m_.sets)
            os << "    " << s.name << '\n';
        os << "    WakeKind\n";
        for (size_t g = 0; g < n_.machines.size(); ++g)
            os << "    " << n_.states_set(static_cast<int>(g)) << '\n';
        os << "constants\n";
        for (const auto& s : m_.sets)
            for (const auto& e : s.elements)
                os << "    " << e << '\n';
        os << "    DEFAULT\n";
        for (size_t g = 0; g < n_.machines.size(); ++g)
            for (const auto& l : n_.all_leaves(static_cast<int>(g)))
                os << "    " << l << '\n';
        for (const auto& c : m_.consts)
            os << "    " << c.name << '\n';
        os << "axioms\n";
        auto partition = [&](const std::string& set, const std::vector<std::string>& elems) {
            os << "    @" << set << " partition(" << set;
            for (const auto& e : elems)
                os << ", {" << e << "}";
            os << ")\n";
        };
        for (const auto& s : m_.sets)
            partition(s.name, s.elements);
        partition("WakeKind", {"DEFAULT"});
        for (size_t g = 0; g < n_.machines.size(); ++g)
            partition(n_.states_set(static_cast<int>(g)), n_.all_leaves(static_cast<int>(g)));
        for (const auto& c : m_.consts) {
            os << "    @typ_" << c.name << ' ' << c.name << " ∈ " << type_text(c.type) << '\n';
            os << "    @def_" << c.name << ' ' << c.name << " = " << render_const(c) << '\n';
        }
        Render r{n_};
        for (const auto& ctx : m_.contexts)
            for (size_t i = 0; i < ctx.axioms.size(); ++i)
                os << "    @axm_" << ctx.name << '_' << i + 1 << ' ' << r.pred(ctx.axioms[i]) << '\n';
        os << "end\n";
        return os.str();
    }

    std::string machine(const RefinementSpec* spec) const
    {
        std::ostringstream os;
        os << "machine " << m_.name << '\n';
        if (spec)
            os << "refines " << spec->abstract->name << '\n';
        os << "sees " << m_.name << "_ctx\n";
        os << "variables\n";
        std::vector<std::pair<std::string, std::string>> typing;
        typing.emplace_back("current_time", "ℕ");
        for (const auto& k : m_.connectors)
            typing.emplace_back(k.name, "ℕ ⇸ " + type_text(k.type));
        for (size_t c = 0; c < m_.components.size(); ++c)
            typing.emplace_back(n_.wakeup(static_cast<int>(c)), "ℕ ⇸ WakeKind");
        for (size_t g = 0; g < n_.machines.size(); ++g)
            typing.emplace_back(n_.sm_var[g], n_.states_set(static_cast<int>(g)));
        for (size_t c = 0; c < m_.components.size(); ++c)
            for (size_t v = 0; v < m_.components[c].vars.size(); ++v)
                typing.emplace_back(n_.var(static_cast<int>(c), static_cast<int>(v)),
                                    type_text(m_.components[c].vars[v].type));
        for (const auto& [v, t] : typing)
            os << "    " << v << '\n';
        if (!b_.flags.empty() || !b_.counters.empty()) {
            os << "    // bookkeeping\n";
            for (const auto& f : b_.flags)
                os << "    " << f << '\n';
            for (const auto& p : b_.counters)
                os << "    " << p << '\n';
        }

        os << "invariants\n";
        for (const auto& [v, t] : typing)
            os << "    @typ_" << v << ' ' << v << " ∈ " << t << '\n';
        for (const auto& f : b_.flags)
            os << "    @typ_" << f << ' ' << f << " ∈ BOOL\n";
        for (const auto& p : b_.counters)
            os << "    @typ_" << p << ' ' << p << " ∈ ℕ\n";
        for (size_t c = 0; c < m_.components.size(); ++c) {
            const auto& comp = m_.components[c];
            Render r{n_, static_cast<int>(c)};
            for (size_t i = 0; i < comp.invariants.size(); ++i)
                os << "    @inv_" << comp.name << '_' << i + 1 << ' ' << r.pred(comp.invariants[i]) << '\n';
            for (size_t mi = 0; mi < comp.machines.size(); ++mi) {
                const int g = n_.global(static_cast<int>(c), static_cast<int>(mi));
                const auto& sm = comp.machines[mi];
                for (size_t s = 0; s < sm.states.size(); ++s)
                    for (size_t i = 0; i < sm.states[s].invariants.size(); ++i)
                        os << "    @inv_" << n_.sm_var[g] << '_' << sm.states[s].name << '_' << i + 1 << ' '
                           << member(n_.sm_var[g], n_.leaves_within(g, static_cast<int>(s))) << " ⇒ "
                           << r.wrap_pred(sm.states[s].invariants[i]) << '\n';
            }
        }
        if (spec)
            gluing(os, *spec);

        std::vector<std::string> variants;
        for (size_t c = 0; c < m_.components.size(); ++c)
            if (m_.components[c].variant)
                variants.push_back(Render{n_, static_cast<int>(c)}.wrap_term(*m_.components[c].variant));
        if (!variants.empty())
            os << "variant\n    " << join(variants, " + ") << '\n';

        os << "events\n";
        print_event(os, initialisation());
        for (size_t c = 0; c < m_.components.size(); ++c) {
            const auto& comp = m_.components[c];
            for (size_t o = 0; o < comp.operations.size(); ++o)
                print_event(os, annotate(op_event(static_cast<int>(c), static_cast<int>(o)), spec));
            for (size_t mi = 0; mi < comp.machines.size(); ++mi)
                for (size_t t = 0; t < comp.machines[mi].transitions.size(); ++t) {
                    const auto& tr = comp.machines[mi].transitions[t];
                    if (tr.link.empty() && !tr.is_initial())
                        print_event(os, annotate(transition_event(static_cast<int>(c), static_cast<int>(mi),
                                                                  static_cast<int>(t)),
                                                 spec));
                }
        }
        EventText tk = tick();
        if (spec)
            tk.refines = "tick";
        print_event(os, tk);
        os << "end\n";
        return os.str();
    }

private:
    std::string render_const(const Model::ConstInfo& c) const
    {
        if (c.type.base == BaseType::Bool)
            return c.value ? "TRUE" : "FALSE";
        return number(c.value);
    }

    void gluing(std::ostream& os, const RefinementSpec& spec) const
    {
        const Model& a = *spec.abstract;
        const Names an(a);
        // Abstract variables keep their names unless the concrete model
        // declares the same name with a different meaning.
        std::map<std::string, std::string> concrete_types;
        for (size_t c = 0; c < m_.components.size(); ++c)
            for (size_t v = 0; v < m_.components[c].vars.size(); ++v)
                concrete_types[n_.var(static_cast<int>(c), static_cast<int>(v))] =
                    type_text(m_.components[c].vars[v].type);
        std::map<std::string, std::vector<std::string>> concrete_leaves;
        for (size_t g = 0; g < n_.machines.size(); ++g)
            concrete_leaves[n_.sm_var[g]] = n_.all_leaves(static_cast<int>(g));
        std::map<std::string, std::string> abstract_types;
        for (size_t c = 0; c < a.components.size(); ++c)
            for (size_t v = 0; v < a.components[c].vars.size(); ++v)
                abstract_types[an.var(static_cast<int>(c), static_cast<int>(v))] = type_text(a.components[c].vars[v].type);
        std::map<std::string, std::vector<std::string>> abstract_leaves;
        for (size_t g = 0; g < an.machines.size(); ++g)
            abstract_leaves[an.sm_var[g]] = an.all_leaves(static_cast<int>(g));
        auto rename = [&](const std::string& v) {
            if (auto it = concrete_types.find(v); it != concrete_types.end() && abstract_types.count(v) &&
                                                  abstract_types.at(v) != it->second)
                return v + "_abs";
            if (auto it = concrete_leaves.find(v);
                it != concrete_leaves.end() && abstract_leaves.count(v) && abstract_leaves.at(v) != it->second)
                return v + "_abs";
            return v;
        };
        Render r{n_, -1, &an, rename};
        for (size_t i = 0; i < spec.glue.size(); ++i)
            os << "    @glue_" << i + 1 << ' ' << r.pred(spec.glue[i]) << '\n';
        for (size_t g = 0; g < spec.machine_map.size(); ++g) {
            const int ag = spec.machine_map[g];
            if (ag < 0)
                continue;
            const std::string av = rename(an.sm_var[ag]);
            if (av == n_.sm_var[g] && n_.all_leaves(static_cast<int>(g)) == an.all_leaves(ag))
                continue; // same variable on both sides
            if (!n_.off[g].empty())
                os << "    @glue_" << n_.sm_var[g] << "_OFF " << n_.sm_var[g] << " = " << n_.off[g] << " ⇒ " << av
                   << " = " << (an.off[ag].empty() ? std::string("?") : an.off[ag]) << '\n';
            const auto& sm = *n_.machines[g];
            for (size_t s = 0; s < sm.states.size(); ++s) {
                if (n_.leaf[g][s].empty())
                    continue;
                const int img = spec.state_map[g][s];
                os << "    @glue_" << n_.sm_var[g] << '_' << sm.states[s].name << ' ' << n_.sm_var[g] << " = "
                   << n_.leaf[g][s] << " ⇒ " << member(av, an.leaves_within(ag, img)) << '\n';
            }
        }
    }

    EventText annotate(EventText e, const RefinementSpec* spec) const
    {
        if (!spec)
            return e;
        auto it = spec->event_map.find(e.name);
        const std::string target = it == spec->event_map.end() ? "new" : it->second;
        if (target == "new") {
            const auto dot = e.name.find('.');
            const int c = m_.find_component(e.name.substr(0, dot));
            e.status = c >= 0 && m_.components[c].variant ? "convergent" : "anticipated";
        } else {
            e.refines = event_id(target);
        }
        return e;
    }

    EventText initialisation() const
    {
        EventText e;
        e.name = "INITIALISATION";
        e.actions.push_back({"init_current_time", "current_time ≔ 0"});
        for (const auto& k : m_.connectors)
            e.actions.push_back({"init_" + k.name, k.name + " ≔ ∅"});
        for (size_t c = 0; c < m_.components.size(); ++c)
            e.actions.push_back({"init_" + n_.wakeup(static_cast<int>(c)), n_.wakeup(static_cast<int>(c)) + " ≔ ∅"});
        for (size_t g = 0; g < n_.machines.size(); ++g) {
            const auto& sm = *n_.machines[g];
            const std::string start = !n_.off[g].empty() ? n_.off[g] : n_.leaf[g][sm.enter(sm.initial_state)];
            e.actions.push_back({"init_" + n_.sm_var[g], n_.sm_var[g] + " ≔ " + start});
        }
        for (size_t c = 0; c < m_.components.size(); ++c)
            for (size_t v = 0; v < m_.components[c].vars.size(); ++v) {
                const auto& var = m_.components[c].vars[v];
                const std::string name = n_.var(static_cast<int>(c), static_cast<int>(v));
                std::string val = var.type.base == BaseType::Bool ? (var.initial ? "TRUE" : "FALSE")
                                  : var.type.base == BaseType::Set
                                      ? m_.sets[var.type.set_index].elements[static_cast<size_t>(var.initial)]
                                      : number(var.initial);
                e.actions.push_back({"init_" + name, name + " ≔ " + val});
            }
        for (const auto& f : b_.flags)
            e.actions.push_back({"init_" + f, f + " ≔ FALSE"});
        for (const auto& p : b_.counters)
            e.actions.push_back({"init_" + p, p + " ≔ 0"});
        return e;
    }

    // Source-state test of a transition.
    std::string source_pred(int g, const Transition& t) const
    {
        if (t.is_initial())
            return n_.sm_var[g] + " = " + n_.off[g];
        return member(n_.sm_var[g], n_.leaves_within(g, t.src));
    }
    std::string target_leaf(int g, const Transition& t) const
    {
        const auto& sm = *n_.machines[g];
        return n_.leaf[g][sm.enter(t.tgt)];
    }

    // Actions of one component, grouped per assigned variable.
    void body_actions(int c, const std::vector<Action>& acts, const Render& r, EventText& e,
                      std::map<std::string, int>& pending_delta) const
    {
        const auto& comp = m_.components[c];
        std::map<std::string, std::vector<std::string>> sends;
        std::vector<std::string> send_order;
        std::vector<std::string> wakes;
        auto at = [&](const Expr& delay) {
            if (delay.kind == ExprKind::IntLit && delay.literal == 0)
                return std::string("current_time");
            return "current_time + " + r.wrap_term(delay);
        };
        for (const auto& a : acts) {
            switch (a.kind) {
            case ActionKind::Assign:
                e.actions.push_back({"act_" + a.target, n_.var(c, a.index) + " ≔ " + r.term(a.value)});
                break;
            case ActionKind::PortSend:
                if (!sends.count(a.target))
                    send_order.push_back(a.target);
                sends[a.target].push_back(at(a.delay) + " ↦ " + r.term(a.value));
                break;
            case ActionKind::SelfWake:
                wakes.push_back(at(a.delay) + " ↦ DEFAULT");
                break;
            case ActionKind::Call:
                ++pending_delta[b_.pending.at({c, a.index})];
                break;
            }
        }
        for (const auto& k : send_order) {
            const auto& v = sends[k];
            if (v.size() == 1) {
                const auto arrow = v[0].find(" ↦ ");
                e.actions.push_back({"send_" + k, k + "(" + v[0].substr(0, arrow) + ") ≔ " + v[0].substr(arrow + 5)});
            } else {
                e.actions.push_back({"send_" + k, k + " ≔ " + k + " \xEE\x84\x83 {" + join(v, ", ") + "}"});
            }
        }
        if (wakes.size() == 1) {
            const auto arrow = wakes[0].find(" ↦ ");
            e.actions.push_back({"wake", n_.wakeup(c) + "(" + wakes[0].substr(0, arrow) + ") ≔ DEFAULT"});
        } else if (!wakes.empty()) {
            e.actions.push_back({"wake", n_.wakeup(c) + " ≔ " + n_.wakeup(c) + " \xEE\x84\x83 {" + join(wakes, ", ") + "}"});
        }
        (void)comp;
    }

    void recv_guards(const std::set<std::string>& recvs, EventText& e) const
    {
        for (const auto& k : recvs) {
            e.params.push_back(k + "_v");
            e.guards.push_back({"recv_" + k, k + "_v = " + k + "(max({t · t ∈ dom(" + k + ") ∧ t ≤ current_time}))"});
        }
    }

    EventText op_event(int c, int o) const
    {
        const auto& comp = m_.components[c];
        const auto& op = comp.operations[o];
        Render r{n_, c};
        EventText e;
        e.name = comp.name + "." + op.name;
        for (const auto& p : op.params) {
            e.params.push_back(p.name);
            std::string ty = type_text(p.type);
            if (p.lo && p.hi)
                ty = number(*p.lo) + " ‥ " + number(*p.hi);
            e.guards.push_back({"typ_" + p.name, p.name + " ∈ " + ty});
        }
        std::vector<std::string> set_flags;
        switch (op.kind) {
        case OpKind::P: {
            for (int k : op.wake_ids)
                e.guards.push_back({"wake_" + m_.connectors[k].name, "current_time ∈ dom(" + m_.connectors[k].name + ")"});
            const auto& f = b_.p_flag.at({c, op.wake_ids});
            e.guards.push_back({"flag", f + " = FALSE"});
            set_flags.push_back(f);
            break;
        }
        case OpKind::S:
            e.guards.push_back({"wake", "current_time ∈ dom(" + n_.wakeup(c) + ")"});
            e.guards.push_back({"flag", b_.s_flag.at(c) + " = FALSE"});
            set_flags.push_back(b_.s_flag.at(c));
            break;
        case OpKind::M:
            e.guards.push_back({"called", b_.pending.at({c, o}) + " > 0"});
            e.guards.push_back({"flag", b_.m_flag.at({c, o}) + " = FALSE"});
            set_flags.push_back(b_.m_flag.at({c, o}));
            break;
        case OpKind::E:
        case OpKind::T:
            break;
        }

        std::set<std::string> recvs;
        for (const auto& g : op.guards)
            collect_recv(g, recvs);
        collect_recv(op.actions, recvs);
        // Linked transitions, per machine.
        struct Linked
        {
            int g;
            std::vector<const Transition*> ts;
        };
        std::vector<Linked> linked;
        for (size_t mi = 0; mi < comp.machines.size(); ++mi) {
            Linked l{n_.global(c, static_cast<int>(mi)), {}};
            for (const auto& t : comp.machines[mi].transitions)
                if (t.link_op == o) {
                    l.ts.push_back(&t);
                    for (const auto& g : t.guards)
                        collect_recv(g, recvs);
                    collect_recv(t.actions, recvs);
                }
            if (!l.ts.empty())
                linked.push_back(std::move(l));
        }
        recv_guards(recvs, e);

        std::map<std::string, int> pending_delta;
        std::vector<Action> transition_actions;
        for (const auto& l : linked) {
            const std::string& v = n_.sm_var[l.g];
            if (l.ts.size() == 1) {
                const auto& t = *l.ts[0];
                e.guards.push_back({"sm_" + v, source_pred(l.g, t)});
                for (size_t i = 0; i < t.guards.size(); ++i)
                    e.guards.push_back({"sm_" + v + "_grd" + std::to_string(i + 1), r.pred(t.guards[i])});
                e.actions.push_back({"sm_" + v, v + " ≔ " + target_leaf(l.g, t)});
                transition_actions.insert(transition_actions.end(), t.actions.begin(), t.actions.end());
            } else {
                std::vector<std::string> pre, ba;
                for (const auto* t : l.ts) {
                    if (!t->actions.empty())
                        throw Error("UnsupportedConstruct",
                                    t->span.str() + ": transition `" + t->name + "` has actions and shares operation `" +
                                        op.name + "` with other transitions of `" + n_.machines[l.g]->name + "`");
                    std::string p = "(" + source_pred(l.g, *t);
                    for (const auto& g : t->guards)
                        p += " ∧ " + r.wrap_pred(g);
                    p += ")";
                    pre.push_back(p);
                    ba.push_back(p.substr(0, p.size() - 1) + " ∧ " + v + "' = " + target_leaf(l.g, *t) + ")");
                }
                e.guards.push_back({"sm_" + v, join(pre, " ∨ ")});
                e.actions.push_back({"sm_" + v, v + " :∣ " + join(ba, " ∨ ")});
            }
            if (auto it = b_.sm_flag.find(l.g); it != b_.sm_flag.end()) {
                e.guards.push_back({"flag_" + v, it->second + " = FALSE"});
                set_flags.push_back(it->second);
            }
        }
        for (size_t i = 0; i < op.guards.size(); ++i)
            e.guards.push_back({"grd" + std::to_string(i + 1), r.pred(op.guards[i])});

        std::vector<Action> all = op.actions;
        all.insert(all.end(), transition_actions.begin(), transition_actions.end());
        if (op.kind == OpKind::M)
            --pending_delta[b_.pending.at({c, o})];
        body_actions(c, all, r, e, pending_delta);
        for (const auto& [p, d] : pending_delta)
            if (d != 0)
                e.actions.push_back({"pending_" + p, p + " ≔ " + p + (d > 0 ? " + " : " − ") + std::to_string(d > 0 ? d : -d)});
        for (const auto& f : set_flags)
            e.actions.push_back({"set_" + f, f + " ≔ TRUE"});
        return e;
    }

    EventText transition_event(int c, int mi, int ti) const
    {
        const auto& comp = m_.components[c];
        const auto& sm = comp.machines[mi];
        const auto& t = sm.transitions[ti];
        const int g = n_.global(c, mi);
        Render r{n_, c};
        EventText e;
        e.name = comp.name + "." + sm.name + "." + t.name;
        std::set<std::string> recvs;
        for (const auto& gd : t.guards)
            collect_recv(gd, recvs);
        collect_recv(t.actions, recvs);
        recv_guards(recvs, e);
        e.guards.push_back({"sm_" + n_.sm_var[g], source_pred(g, t)});
        for (size_t i = 0; i < t.guards.size(); ++i)
            e.guards.push_back({"grd" + std::to_string(i + 1), r.pred(t.guards[i])});
        if (auto it = b_.sm_flag.find(g); it != b_.sm_flag.end())
            e.guards.push_back({"flag", it->second + " = FALSE"});
        e.actions.push_back({"sm_" + n_.sm_var[g], n_.sm_var[g] + " ≔ " + target_leaf(g, t)});
        std::map<std::string, int> pending_delta;
        body_actions(c, t.actions, r, e, pending_delta);
        for (const auto& [p, d] : pending_delta)
            e.actions.push_back({"pending_" + p, p + " ≔ " + p + " + " + std::to_string(d)});
        if (auto it = b_.sm_flag.find(g); it != b_.sm_flag.end())
            e.actions.push_back({"set_" + it->second, it->second + " ≔ TRUE"});
        return e;
    }

    EventText tick() const
    {
        EventText e;
        e.name = "tick";
        for (size_t k = 0; k < m_.connectors.size(); ++k) {
            std::string g = "current_time ∉ dom(" + m_.connectors[k].name + ")";
            for (const auto& [key, flag] : b_.p_flag)
                if (std::find(key.second.begin(), key.second.end(), static_cast<int>(k)) != key.second.end())
                    g += " ∨ " + flag + " = TRUE";
            e.guards.push_back({"tick_" + m_.connectors[k].name, g});
        }
        for (size_t c = 0; c < m_.components.size(); ++c) {
            const auto w = n_.wakeup(static_cast<int>(c));
            std::string g = "current_time ∉ dom(" + w + ")";
            if (auto it = b_.s_flag.find(static_cast<int>(c)); it != b_.s_flag.end())
                g += " ∨ " + it->second + " = TRUE";
            e.guards.push_back({"tick_" + w, g});
        }
        for (const auto& p : b_.counters)
            e.guards.push_back({"tick_" + p, p + " = 0"});
        for (const auto& [g, flag] : b_.sm_flag) {
            const auto& sm = *n_.machines[g];
            std::set<std::string> busy;
            for (const auto& t : sm.transitions)
                if (!t.is_initial())
                    for (const auto& l : n_.leaves_within(g, t.src))
                        busy.insert(l);
            if (busy.empty())
                continue;
            e.guards.push_back({"tick_" + n_.sm_var[g],
                                n_.sm_var[g] + " ∉ {" + join({busy.begin(), busy.end()}, ", ") + "} ∨ " + flag + " = TRUE"});
        }
        e.actions.push_back({"advance", "current_time ≔ current_time + 1"});
        for (const auto& f : b_.flags)
            e.actions.push_back({"reset_" + f, f + " ≔ FALSE"});
        return e;
    }

    static void print_event(std::ostream& os, const EventText& e)
    {
        os << "    ";
        if (!e.status.empty())
            os << e.status << ' ';
        os << "event " << event_id(e.name) << '\n';
        if (!e.refines.empty())
            os << "    refines " << e.refines << '\n';
        if (!e.params.empty())
            os << "    any " << join(e.params, " ") << '\n';
        if (!e.guards.empty()) {
            os << "    where\n";
            std::map<std::string, int> seen;
            for (const auto& g : e.guards) {
                const int n = ++seen[g.label];
                os << "        @" << g.label << (n > 1 ? "_" + std::to_string(n) : "") << ' ' << g.text << '\n';
            }
        }
        if (!e.actions.empty()) {
            os << "    then\n";
            std::map<std::string, int> seen;
            for (const auto& a : e.actions) {
                const int n = ++seen[a.label];
                os << "        @" << a.label << (n > 1 ? "_" + std::to_string(n) : "") << ' ' << a.text << '\n';
            }
        }
        os << "    end\n";
    }

    const Model& m_;
    Names n_;
    Bookkeeping b_;
};

} // namespace

EmittedModel emit(const Model& m)
{
    if (!m.validated)
        throw Error("NotValidated", "model `" + m.name + "` must be validated before emission");
    Emitter em(m);
    return {m.name, em.context(), em.machine(nullptr)};
}

EmittedModel emit_refinement(const RefinementSpec& spec)
{
    const Model& m = *spec.concrete;
    if (!m.validated || !spec.abstract->validated)
        throw Error("NotValidated", "both models must be validated before emission");
    Emitter em(m);
    return {m.name, em.context(), em.machine(&spec)};
}

std::vector<std::string> write_emitted(const EmittedModel& e, const std::string& dir)
{
    const std::string base = (dir.empty() ? std::string(".") : dir) + "/" + e.name;
    write_file(base + ".ctx.eventb", e.context);
    write_file(base + ".mch.eventb", e.machine);
    return {base + ".ctx.eventb", base + ".mch.eventb"};
}

} // namespace coda
