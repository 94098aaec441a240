#include "coda/kernel.hpp"

#include "coda/eval.hpp"

#include <algorithm>
#include <cstring>
#include <limits>

namespace coda {

struct Kernel::Ctx
{
    const Kernel& k;
    const RuntimeState& s;
    const std::vector<Value>* args = nullptr;

    Value var(const Expr& e) const { return s.vars[e.comp][e.index]; }
    Value param(int i) const { return (*args)[i]; }
    std::optional<Value> recv(int c) const { return k.recv_value(s, c); }
    bool in_state(const Expr& e) const
    {
        const int g = k.global_machine(e.comp, e.machine);
        const int leaf = s.config[g];
        return leaf >= 0 && k.machine_of(g).within(leaf, e.state);
    }
    Value bound() const { return k.opts_.int_bound; }
};

namespace {

void put(std::string& out, std::int64_t v)
{
    char buf[sizeof v];
    std::memcpy(buf, &v, sizeof v);
    out.append(buf, sizeof v);
}

std::vector<std::string> split_dots(const std::string& s)
{
    std::vector<std::string> out(1);
    for (char c : s) {
        if (c == '.')
            out.emplace_back();
        else
            out.back() += c;
    }
    return out;
}

} // namespace

Kernel::Kernel(const Model& model, KernelOptions opts) : m_(&model), opts_(opts)
{
    if (!model.validated)
        throw Error("NotValidated", "model `" + model.name + "` must be validated before execution");
    auto& L = layout_;
    const auto& comps = model.components;
    L.op_bit.resize(comps.size());
    L.s_bit.assign(comps.size(), -1);
    for (size_t c = 0; c < comps.size(); ++c) {
        const auto& comp = comps[c];
        L.op_bit[c].assign(comp.operations.size(), -1);
        for (size_t o = 0; o < comp.operations.size(); ++o) {
            const auto& op = comp.operations[o];
            switch (op.kind) {
            case OpKind::P: {
                auto it = std::find_if(L.p_groups.begin(), L.p_groups.end(), [&](const Layout::Group& g) {
                    return g.comp == static_cast<int>(c) && g.connectors == op.wake_ids;
                });
                if (it == L.p_groups.end()) {
                    std::string name = comp.name + ".wake{";
                    for (size_t i = 0; i < op.wake_ids.size(); ++i)
                        name += (i ? "," : "") + model.connectors[op.wake_ids[i]].name;
                    L.p_groups.push_back({static_cast<int>(c), op.wake_ids, L.bit_count++});
                    L.bit_names.push_back(name + "}");
                    it = std::prev(L.p_groups.end());
                }
                L.op_bit[c][o] = it->bit;
                break;
            }
            case OpKind::S:
                if (L.s_bit[c] < 0) {
                    L.s_bit[c] = L.bit_count++;
                    L.bit_names.push_back(comp.name + ".selfwake");
                }
                L.op_bit[c][o] = L.s_bit[c];
                break;
            case OpKind::M:
                L.op_bit[c][o] = L.bit_count++;
                L.bit_names.push_back(comp.name + "." + op.name);
                break;
            default:
                break;
            }
        }
    }
    for (size_t c = 0; c < comps.size(); ++c) {
        L.machine_base.push_back(L.machine_count);
        for (size_t mi = 0; mi < comps[c].machines.size(); ++mi) {
            const auto& sm = comps[c].machines[mi];
            machine_comp_.push_back(static_cast<int>(c));
            machine_local_.push_back(static_cast<int>(mi));
            if (sm.mode == MachineMode::Sync) {
                L.machine_bit.push_back(L.bit_count++);
                L.bit_names.push_back(comps[c].name + "." + sm.name);
            } else {
                L.machine_bit.push_back(-1);
            }
            ++L.machine_count;
        }
    }
}

const StateMachine& Kernel::machine_of(int g) const
{
    return m_->components[machine_comp_[g]].machines[machine_local_[g]];
}

int Kernel::comp_of_machine(int g) const { return machine_comp_[g]; }

RuntimeState Kernel::init() const
{
    RuntimeState s;
    s.channels.resize(m_->connectors.size());
    s.wakes.resize(m_->components.size());
    for (const auto& c : m_->components) {
        std::vector<Value> vals;
        for (const auto& v : c.vars)
            vals.push_back(v.initial);
        s.vars.push_back(std::move(vals));
    }
    for (int g = 0; g < layout_.machine_count; ++g) {
        const auto& sm = machine_of(g);
        s.config.push_back(sm.initial_link.empty() ? sm.enter(sm.initial_state) : -1);
    }
    s.fired.assign(layout_.bit_count, 0);
    return s;
}

std::optional<Value> Kernel::recv_value(const RuntimeState& s, int connector) const
{
    const auto& ch = s.channels[connector];
    auto it = ch.upper_bound(s.now);
    if (it == ch.begin())
        return std::nullopt;
    return std::prev(it)->second;
}

bool Kernel::apply_send(RuntimeState& s, int connector, Value v, Time delay) const
{
    if (delay < 0)
        throw Error("RangeError", "negative delay " + std::to_string(delay) + " on connector `" +
                                      m_->connectors[connector].name + "`");
    auto [it, fresh] = s.channels[connector].insert_or_assign(s.now + delay, v);
    return !fresh;
}

void Kernel::apply_self_wake(RuntimeState& s, int comp, Time delay) const
{
    if (delay < 0)
        throw Error("RangeError", "negative self-wake delay " + std::to_string(delay) + " in `" +
                                      m_->components[comp].name + "`");
    s.wakes[comp][s.now + delay] = WakeKind::Default;
}

bool Kernel::guards_hold(const RuntimeState& s, int, const std::vector<Expr>& guards,
                         const std::vector<Value>& args) const
{
    Ctx ctx{*this, s, &args};
    for (const auto& g : guards) {
        auto v = evaluate(*m_, g, ctx);
        if (!v || !*v)
            return false;
    }
    return true;
}

bool Kernel::source_active(const RuntimeState& s, int comp, int machine, const Transition& t) const
{
    const int g = global_machine(comp, machine);
    const int leaf = s.config[g];
    if (t.is_initial())
        return leaf < 0;
    return leaf >= 0 && machine_of(g).within(leaf, t.src);
}

bool Kernel::machine_enabled(const RuntimeState& s, int g) const
{
    const int leaf = s.config[g];
    if (leaf < 0)
        return false;
    const auto& sm = machine_of(g);
    return std::any_of(sm.transitions.begin(), sm.transitions.end(),
                       [&](const Transition& t) { return !t.is_initial() && sm.within(leaf, t.src); });
}

bool Kernel::op_base_enabled(const RuntimeState& s, int c, int o, std::vector<std::string>* why) const
{
    const auto& comp = m_->components[c];
    const auto& op = comp.operations[o];
    const int bit = layout_.op_bit[c][o];
    bool ok = true;
    auto no = [&](std::string msg) {
        ok = false;
        if (why)
            why->push_back(std::move(msg));
    };
    if (bit >= 0 && s.fired[bit])
        no("sync flag `" + layout_.bit_names[bit] + "` already set this cycle");
    switch (op.kind) {
    case OpKind::P:
        for (int k : op.wake_ids)
            if (!s.channels[k].count(s.now))
                no("no delivery on connector `" + m_->connectors[k].name + "` at time " + std::to_string(s.now));
        break;
    case OpKind::S:
        if (!s.wakes[c].count(s.now))
            no("no self-wake of `" + comp.name + "` scheduled at time " + std::to_string(s.now));
        break;
    case OpKind::E:
        if (s.env_count >= opts_.env_bound)
            no("environment bound of " + std::to_string(opts_.env_bound) + " events per cycle reached");
        break;
    case OpKind::M:
        if (std::none_of(s.pending.begin(), s.pending.end(),
                         [&](const PendingCall& p) { return p.comp == c && p.op == o; }))
            no("method `" + comp.name + "." + op.name + "` has not been called");
        break;
    case OpKind::T:
        break;
    }
    return ok;
}

bool Kernel::transition_available(const RuntimeState& s, int c, int mi, int ti, const std::vector<Value>& args,
                                  bool linked, std::vector<std::string>* why) const
{
    const auto& sm = m_->components[c].machines[mi];
    const auto& t = sm.transitions[ti];
    const int g = global_machine(c, mi);
    bool ok = true;
    auto no = [&](std::string msg) {
        ok = false;
        if (why)
            why->push_back(std::move(msg));
    };
    const int bit = layout_.machine_bit[g];
    if (bit >= 0 && s.fired[bit])
        no("synchronous machine `" + sm.name + "` already fired this cycle");
    if (!source_active(s, c, mi, t)) {
        const int leaf = s.config[g];
        const std::string cur = leaf < 0 ? "inactive" : "in " + sm.states[leaf].name;
        no("transition `" + sm.name + "." + t.name + "` needs " + (t.is_initial() ? std::string("an inactive machine") : t.source) +
           ", machine is " + cur);
    }
    if (ok || why) {
        Ctx ctx{*this, s, &args};
        for (const auto& gd : t.guards) {
            auto v = evaluate(*m_, gd, ctx);
            if (!v || !*v) {
                no("guard `" + to_string(gd) + "` of transition `" + sm.name + "." + t.name + "` is " +
                   (v ? "false" : "undefined"));
                if (!why)
                    break;
            }
        }
    }
    (void)linked;
    return ok;
}

void Kernel::op_events(const RuntimeState& s, int c, int o, std::vector<Event>& out) const
{
    if (!op_base_enabled(s, c, o, nullptr))
        return;
    const auto& comp = m_->components[c];
    const auto& op = comp.operations[o];

    std::vector<std::vector<Value>> domains;
    for (const auto& p : op.params)
        domains.push_back(domain_of(*m_, p.type, p.lo, p.hi));
    std::vector<Value> args(op.params.size());
    std::vector<size_t> idx(op.params.size(), 0);
    for (const auto& d : domains)
        if (d.empty())
            return;

    for (;;) {
        for (size_t i = 0; i < args.size(); ++i)
            args[i] = domains[i][idx[i]];
        if (guards_hold(s, c, op.guards, args)) {
            // One available linked transition per machine that links this op.
            std::vector<std::vector<std::pair<int, int>>> choices;
            bool blocked = false;
            for (size_t mi = 0; mi < comp.machines.size() && !blocked; ++mi) {
                const auto& sm = comp.machines[mi];
                std::vector<std::pair<int, int>> avail;
                bool links = false;
                for (size_t ti = 0; ti < sm.transitions.size(); ++ti) {
                    if (sm.transitions[ti].link_op != o)
                        continue;
                    links = true;
                    if (transition_available(s, c, static_cast<int>(mi), static_cast<int>(ti), args, true, nullptr))
                        avail.emplace_back(static_cast<int>(mi), static_cast<int>(ti));
                }
                if (links) {
                    if (avail.empty())
                        blocked = true;
                    choices.push_back(std::move(avail));
                }
            }
            if (!blocked) {
                std::vector<size_t> pick(choices.size(), 0);
                for (;;) {
                    Event e;
                    e.kind = EventKind::Operation;
                    e.comp = c;
                    e.op = o;
                    e.args = args;
                    for (size_t i = 0; i < choices.size(); ++i)
                        e.linked.push_back(choices[i][pick[i]]);
                    out.push_back(std::move(e));
                    size_t i = 0;
                    for (; i < pick.size(); ++i) {
                        if (++pick[i] < choices[i].size())
                            break;
                        pick[i] = 0;
                    }
                    if (i == pick.size())
                        break;
                }
            }
        }
        size_t i = 0;
        for (; i < idx.size(); ++i) {
            if (++idx[i] < domains[i].size())
                break;
            idx[i] = 0;
        }
        if (i == idx.size())
            break;
    }
}

std::vector<Event> Kernel::enabled(const RuntimeState& s) const
{
    std::vector<Event> out;
    const std::vector<Value> none;
    for (size_t c = 0; c < m_->components.size(); ++c) {
        const auto& comp = m_->components[c];
        for (size_t o = 0; o < comp.operations.size(); ++o)
            op_events(s, static_cast<int>(c), static_cast<int>(o), out);
        for (size_t mi = 0; mi < comp.machines.size(); ++mi) {
            const auto& sm = comp.machines[mi];
            for (size_t ti = 0; ti < sm.transitions.size(); ++ti) {
                if (sm.transitions[ti].link_op >= 0)
                    continue;
                if (transition_available(s, static_cast<int>(c), static_cast<int>(mi), static_cast<int>(ti), none,
                                         false, nullptr)) {
                    Event e;
                    e.kind = EventKind::Transition;
                    e.comp = static_cast<int>(c);
                    e.machine = static_cast<int>(mi);
                    e.transition = static_cast<int>(ti);
                    out.push_back(std::move(e));
                }
            }
        }
    }
    if (tick_enabled(s))
        out.push_back(Event{});
    return out;
}

std::vector<std::string> Kernel::tick_blockers(const RuntimeState& s) const
{
    std::vector<std::string> why;
    for (const auto& p : s.pending)
        why.push_back("method call `" + m_->components[p.comp].name + "." + m_->components[p.comp].operations[p.op].name +
                      "` is pending");
    for (size_t k = 0; k < s.channels.size(); ++k) {
        if (!s.channels[k].count(s.now))
            continue;
        const bool answered = std::any_of(layout_.p_groups.begin(), layout_.p_groups.end(), [&](const Layout::Group& g) {
            return s.fired[g.bit] &&
                   std::find(g.connectors.begin(), g.connectors.end(), static_cast<int>(k)) != g.connectors.end();
        });
        if (!answered)
            why.push_back("delivery on connector `" + m_->connectors[k].name + "` at time " + std::to_string(s.now) +
                          " has not been answered by a port-wake operation");
    }
    for (size_t c = 0; c < s.wakes.size(); ++c) {
        if (!s.wakes[c].count(s.now))
            continue;
        const int bit = layout_.s_bit[c];
        if (bit < 0 || !s.fired[bit])
            why.push_back("self-wake of `" + m_->components[c].name + "` at time " + std::to_string(s.now) +
                          " has not been answered");
    }
    for (int g = 0; g < layout_.machine_count; ++g) {
        const int bit = layout_.machine_bit[g];
        if (bit >= 0 && machine_enabled(s, g) && !s.fired[bit])
            why.push_back("synchronous machine `" + m_->components[machine_comp_[g]].name + "." + machine_of(g).name +
                          "` has not fired this cycle");
    }
    return why;
}

bool Kernel::tick_enabled(const RuntimeState& s) const
{
    if (!s.pending.empty())
        return false;
    for (size_t k = 0; k < s.channels.size(); ++k) {
        if (!s.channels[k].count(s.now))
            continue;
        bool answered = false;
        for (const auto& g : layout_.p_groups)
            if (s.fired[g.bit] && std::binary_search(g.connectors.begin(), g.connectors.end(), static_cast<int>(k)))
                answered = true;
        if (!answered)
            return false;
    }
    for (size_t c = 0; c < s.wakes.size(); ++c)
        if (s.wakes[c].count(s.now) && (layout_.s_bit[c] < 0 || !s.fired[layout_.s_bit[c]]))
            return false;
    for (int g = 0; g < layout_.machine_count; ++g) {
        const int bit = layout_.machine_bit[g];
        if (bit >= 0 && !s.fired[bit] && machine_enabled(s, g))
            return false;
    }
    return true;
}

std::optional<Value> Kernel::variant(const RuntimeState& s, int comp) const
{
    const auto& v = m_->components[comp].variant;
    if (!v)
        return std::nullopt;
    Ctx ctx{*this, s, nullptr};
    return evaluate(*m_, *v, ctx);
}

EventRecord Kernel::fire(RuntimeState& s, const Event& e) const
{
    if (e.kind == EventKind::Tick)
        return tick(s);
    const auto en = enabled(s);
    if (std::find(en.begin(), en.end(), e) == en.end()) {
        std::string msg = "event `" + event_name(e) + "` is not enabled at time " + std::to_string(s.now);
        for (const auto& w : explain(s, e))
            msg += "; " + w;
        throw Error("NotEnabled", msg);
    }
    return fire_unchecked(s, e);
}

EventRecord Kernel::fire_unchecked(RuntimeState& s, const Event& e) const
{
    if (e.kind == EventKind::Tick)
        return tick(s);
    const int c = e.comp;
    const auto& comp = m_->components[c];

    EventRecord rec;
    rec.event = event_name(e);
    rec.kind = kind_name(e);
    rec.time = s.now;
    rec.bindings = bindings(e);
    rec.transitions = linked_names(e);

    // Actions to run, with the parameter vector they see.
    std::vector<const Action*> acts;
    std::vector<std::pair<int, int>> taken; // (machine, transition)
    const Operation* op = nullptr;
    if (e.kind == EventKind::Operation) {
        op = &comp.operations[e.op];
        for (const auto& a : op->actions)
            acts.push_back(&a);
        taken = e.linked;
        if (op->kind == OpKind::P)
            for (int k : op->wake_ids)
                rec.received.emplace_back(m_->connectors[k].name,
                                          render_value(*m_, m_->connectors[k].type, s.channels[k].at(s.now)));
    } else {
        taken.emplace_back(e.machine, e.transition);
    }
    for (auto [mi, ti] : taken)
        for (const auto& a : comp.machines[mi].transitions[ti].actions)
            acts.push_back(&a);

    bool unsynchronised = false;
    if (e.kind == EventKind::Transition)
        unsynchronised = comp.machines[e.machine].mode == MachineMode::Async;
    else if (op->kind == OpKind::T)
        unsynchronised = std::none_of(taken.begin(), taken.end(),
                                      [&](auto p) { return comp.machines[p.first].mode == MachineMode::Sync; });
    std::optional<Value> variant_before;
    if (unsynchronised && comp.variant)
        variant_before = variant(s, c);

    // Right-hand sides see the pre-state.
    struct Effect
    {
        const Action* a;
        Value value = 0;
        Value delay = 0;
    };
    std::vector<Effect> effects;
    {
        Ctx ctx{*this, s, &e.args};
        for (const Action* a : acts) {
            Effect fx{a};
            auto need = [&](const Expr& x) -> Value {
                auto v = evaluate(*m_, x, ctx);
                if (!v)
                    throw Error("RecvUndefined", rec.event + ": `" + to_string(x) +
                                                     "` reads a connector that has not delivered a value yet");
                return *v;
            };
            if (a->kind == ActionKind::Assign || a->kind == ActionKind::PortSend)
                fx.value = need(a->value);
            if (a->kind == ActionKind::PortSend || a->kind == ActionKind::SelfWake)
                fx.delay = need(a->delay);
            effects.push_back(fx);
        }
    }

    const RuntimeState before = s;
    int call_depth = 1;
    if (op && op->kind == OpKind::M) {
        auto it = std::find_if(s.pending.begin(), s.pending.end(),
                               [&](const PendingCall& p) { return p.comp == c && p.op == e.op; });
        call_depth = it->depth + 1;
        s.pending.erase(it);
    }

    for (const auto& fx : effects) {
        const Action& a = *fx.a;
        switch (a.kind) {
        case ActionKind::Assign: {
            const auto& var = comp.vars[a.index];
            if (var.type.base == BaseType::Nat && fx.value < 0)
                throw Error("RangeError", rec.event + ": NAT variable `" + comp.name + "." + var.name +
                                              "` would become " + std::to_string(fx.value));
            if (fx.value > opts_.int_bound || fx.value < -opts_.int_bound)
                throw Error("Overflow", rec.event + ": `" + var.name + "` exceeds the integer bound");
            s.vars[c][a.index] = fx.value;
            break;
        }
        case ActionKind::PortSend: {
            const auto& con = m_->connectors[a.index];
            if (con.type.base == BaseType::Nat && fx.value < 0)
                throw Error("RangeError", rec.event + ": negative value sent on NAT connector `" + con.name + "`");
            if (apply_send(s, a.index, fx.value, fx.delay)) {
                const std::string w = "SendCollision: `" + con.name + "` at time " + std::to_string(s.now + fx.delay) +
                                      " overwritten by " + rec.event;
                if (opts_.strict_collisions)
                    throw Error("SendCollision", w);
                rec.warnings.push_back(w);
            }
            rec.sends.push_back({con.name, render_value(*m_, con.type, fx.value), s.now + fx.delay});
            break;
        }
        case ActionKind::SelfWake:
            apply_self_wake(s, c, fx.delay);
            rec.wakes.push_back(s.now + fx.delay);
            break;
        case ActionKind::Call:
            if (call_depth > opts_.max_method_depth)
                throw Error("MethodDepthExceeded", rec.event + ": method calls nested deeper than " +
                                                       std::to_string(opts_.max_method_depth));
            s.pending.push_back({c, a.index, call_depth});
            rec.calls.push_back(comp.name + "." + comp.operations[a.index].name);
            break;
        }
    }
    std::sort(s.pending.begin(), s.pending.end());

    for (auto [mi, ti] : taken) {
        const auto& sm = comp.machines[mi];
        const int g = global_machine(c, mi);
        s.config[g] = sm.enter(sm.transitions[ti].tgt);
        if (layout_.machine_bit[g] >= 0)
            s.fired[layout_.machine_bit[g]] = 1;
    }
    if (op) {
        const int bit = layout_.op_bit[c][e.op];
        if (bit >= 0)
            s.fired[bit] = 1;
        if (op->kind == OpKind::E)
            ++s.env_count;
    }

    if (variant_before) {
        const auto after = variant(s, c);
        if (!after || *after >= *variant_before || *variant_before < 0)
            throw Error("VariantNotDecreased", rec.event + ": variant `" + to_string(*comp.variant) + "` of `" +
                                                   comp.name + "` went from " + std::to_string(*variant_before) +
                                                   " to " + (after ? std::to_string(*after) : "?"));
    }

    for (size_t v = 0; v < comp.vars.size(); ++v)
        if (before.vars[c][v] != s.vars[c][v])
            rec.deltas.push_back({comp.name + "." + comp.vars[v].name,
                                  render_value(*m_, comp.vars[v].type, before.vars[c][v]),
                                  render_value(*m_, comp.vars[v].type, s.vars[c][v])});
    return rec;
}

EventRecord Kernel::tick(RuntimeState& s) const
{
    if (!tick_enabled(s)) {
        std::string msg = "tick is not enabled at time " + std::to_string(s.now);
        for (const auto& w : tick_blockers(s))
            msg += "; " + w;
        throw Error("NotEnabled", msg);
    }
    EventRecord rec;
    rec.event = "tick";
    rec.kind = "tick";
    rec.time = s.now;
    ++s.now;
    std::fill(s.fired.begin(), s.fired.end(), 0);
    s.env_count = 0;
    if (opts_.prune)
        for (auto& ch : s.channels) {
            auto it = ch.upper_bound(s.now);
            if (it != ch.begin())
                ch.erase(ch.begin(), std::prev(it));
        }
    for (auto& w : s.wakes)
        w.erase(w.begin(), w.lower_bound(s.now));
    return rec;
}

std::vector<std::string> Kernel::explain(const RuntimeState& s, const Event& e) const
{
    std::vector<std::string> why;
    if (e.kind == EventKind::Tick)
        return tick_blockers(s);
    const auto& comp = m_->components[e.comp];
    if (e.kind == EventKind::Transition) {
        const auto& t = comp.machines[e.machine].transitions[e.transition];
        if (t.link_op >= 0)
            why.push_back("transition `" + t.name + "` only fires with operation `" + t.link + "`");
        transition_available(s, e.comp, e.machine, e.transition, {}, false, &why);
        return why;
    }
    const auto& op = comp.operations[e.op];
    op_base_enabled(s, e.comp, e.op, &why);
    if (e.args.size() != op.params.size()) {
        why.push_back("expected " + std::to_string(op.params.size()) + " parameter bindings");
        return why;
    }
    Ctx ctx{*this, s, &e.args};
    for (const auto& g : op.guards) {
        auto v = evaluate(*m_, g, ctx);
        if (!v)
            why.push_back("guard `" + to_string(g) + "` is undefined (nothing received yet)");
        else if (!*v)
            why.push_back("guard `" + to_string(g) + "` is false");
    }
    for (size_t mi = 0; mi < comp.machines.size(); ++mi) {
        const auto& sm = comp.machines[mi];
        std::vector<std::string> reasons;
        bool links = false;
        bool any = false;
        for (size_t ti = 0; ti < sm.transitions.size(); ++ti) {
            if (sm.transitions[ti].link_op != e.op)
                continue;
            const bool chosen = std::find(e.linked.begin(), e.linked.end(),
                                          std::pair<int, int>(static_cast<int>(mi), static_cast<int>(ti))) != e.linked.end();
            if (!e.linked.empty() && !chosen)
                continue;
            links = true;
            if (transition_available(s, e.comp, static_cast<int>(mi), static_cast<int>(ti), e.args, true, &reasons))
                any = true;
        }
        if (links && !any)
            why.insert(why.end(), reasons.begin(), reasons.end());
    }
    if (why.empty()) {
        // Everything holds individually; the exact combination was not offered.
        const auto en = enabled(s);
        if (std::find(en.begin(), en.end(), e) == en.end())
            why.push_back("parameter values or transition choice not available");
    }
    return why;
}

std::string Kernel::event_name(const Event& e) const
{
    switch (e.kind) {
    case EventKind::Tick:
        return "tick";
    case EventKind::Operation:
        return m_->components[e.comp].name + "." + m_->components[e.comp].operations[e.op].name;
    case EventKind::Transition: {
        const auto& sm = m_->components[e.comp].machines[e.machine];
        return m_->components[e.comp].name + "." + sm.name + "." + sm.transitions[e.transition].name;
    }
    }
    return "?";
}

std::string Kernel::kind_name(const Event& e) const
{
    switch (e.kind) {
    case EventKind::Tick:
        return "tick";
    case EventKind::Operation:
        return std::string(1, kind_letter(m_->components[e.comp].operations[e.op].kind));
    case EventKind::Transition:
        return "transition";
    }
    return "?";
}

std::vector<std::pair<std::string, std::string>> Kernel::bindings(const Event& e) const
{
    std::vector<std::pair<std::string, std::string>> out;
    if (e.kind != EventKind::Operation)
        return out;
    const auto& op = m_->components[e.comp].operations[e.op];
    for (size_t i = 0; i < op.params.size() && i < e.args.size(); ++i)
        out.emplace_back(op.params[i].name, render_value(*m_, op.params[i].type, e.args[i]));
    return out;
}

std::vector<std::string> Kernel::linked_names(const Event& e) const
{
    std::vector<std::string> out;
    if (e.kind == EventKind::Operation)
        for (auto [mi, ti] : e.linked) {
            const auto& sm = m_->components[e.comp].machines[mi];
            out.push_back(sm.name + "." + sm.transitions[ti].name);
        }
    return out;
}

Event Kernel::lookup(const std::string& name, const std::map<std::string, std::string>& binds) const
{
    Event e;
    if (name == "tick") {
        if (!binds.empty())
            throw Error("BadBinding", "tick takes no parameters");
        return e;
    }
    const auto parts = split_dots(name);
    const int c = parts.size() >= 2 ? m_->find_component(parts[0]) : -1;
    if (c < 0)
        throw Error("UnknownEvent", "unknown event `" + name + "`");
    const auto& comp = m_->components[c];
    e.comp = c;
    if (parts.size() == 2) {
        e.kind = EventKind::Operation;
        e.op = comp.find_op(parts[1]);
        if (e.op < 0)
            throw Error("UnknownEvent", "component `" + comp.name + "` has no operation `" + parts[1] + "`");
        const auto& op = comp.operations[e.op];
        for (const auto& [k, v] : binds)
            if (std::none_of(op.params.begin(), op.params.end(), [&](const Param& p) { return p.name == k; }))
                throw Error("BadBinding", "`" + name + "` has no parameter `" + k + "`");
        for (const auto& p : op.params) {
            auto it = binds.find(p.name);
            if (it == binds.end())
                throw Error("BadBinding", "missing binding for parameter `" + p.name + "` of `" + name + "`");
            auto v = parse_value(*m_, p.type, it->second);
            if (!v || (p.lo && *v < *p.lo) || (p.hi && *v > *p.hi))
                throw Error("BadBinding", "`" + it->second + "` is not a valid value for parameter `" + p.name + "`");
            e.args.push_back(*v);
        }
        return e;
    }
    if (parts.size() == 3) {
        e.kind = EventKind::Transition;
        e.machine = comp.find_machine(parts[1]);
        if (e.machine >= 0) {
            const auto& sm = comp.machines[e.machine];
            for (size_t t = 0; t < sm.transitions.size(); ++t)
                if (sm.transitions[t].name == parts[2])
                    e.transition = static_cast<int>(t);
        }
        if (e.transition < 0)
            throw Error("UnknownEvent", "unknown transition `" + name + "`");
        if (!binds.empty())
            throw Error("BadBinding", "transitions take no parameters");
        return e;
    }
    throw Error("UnknownEvent", "unknown event `" + name + "`");
}

std::vector<Event> Kernel::matching(const RuntimeState& s, const std::string& name,
                                    const std::map<std::string, std::string>& binds) const
{
    const Event want = lookup(name, binds);
    std::vector<Event> out;
    for (auto& e : enabled(s))
        if (e.kind == want.kind && e.comp == want.comp && e.op == want.op && e.machine == want.machine &&
            e.transition == want.transition && e.args == want.args)
            out.push_back(std::move(e));
    return out;
}

std::vector<std::string> Kernel::violated_invariants(const RuntimeState& s) const
{
    std::vector<std::string> out;
    Ctx ctx{*this, s, nullptr};
    for (const auto& comp : m_->components)
        for (const auto& inv : comp.invariants) {
            auto v = evaluate(*m_, inv, ctx);
            if (!v || !*v)
                out.push_back(comp.name + ": invariant `" + to_string(inv) + "`");
        }
    for (int g = 0; g < layout_.machine_count; ++g) {
        const auto& sm = machine_of(g);
        for (int st = s.config[g]; st >= 0; st = sm.states[st].parent)
            for (const auto& inv : sm.states[st].invariants) {
                auto v = evaluate(*m_, inv, ctx);
                if (!v || !*v)
                    out.push_back(m_->components[machine_comp_[g]].name + "." + sm.name + "." + sm.states[st].name +
                                  ": invariant `" + to_string(inv) + "`");
            }
    }
    return out;
}

std::string Kernel::canonical_key(const RuntimeState& s, bool relative) const
{
    std::string out;
    out.reserve(256);
    const Time base = relative ? s.now : 0;
    if (!relative)
        put(out, s.now);
    for (const auto& ch : s.channels) {
        auto it = ch.begin();
        if (relative) {
            auto first_future = ch.upper_bound(s.now);
            if (first_future != ch.begin()) {
                auto latest = std::prev(first_future);
                if (latest->first < s.now) {
                    out += 'p';
                    put(out, latest->second);
                    it = first_future;
                } else {
                    it = latest;
                }
            } else {
                it = first_future;
            }
        }
        for (; it != ch.end(); ++it) {
            out += 'e';
            put(out, it->first - base);
            put(out, it->second);
        }
        out += '|';
    }
    for (const auto& w : s.wakes) {
        for (auto it = w.lower_bound(relative ? s.now : std::numeric_limits<Time>::min()); it != w.end(); ++it)
            put(out, it->first - base);
        out += '|';
    }
    for (const auto& vs : s.vars)
        for (Value v : vs)
            put(out, v);
    for (int c : s.config)
        put(out, c);
    out.append(s.fired.begin(), s.fired.end());
    for (const auto& p : s.pending) {
        put(out, p.comp);
        put(out, p.op);
        put(out, p.depth);
    }
    out += '|';
    put(out, s.env_count);
    return out;
}

std::optional<std::string> Kernel::observe(const RuntimeState& s, const std::string& name) const
{
    const auto parts = split_dots(name);
    if (parts.size() == 1) {
        const int k = m_->find_connector(name);
        if (k < 0)
            return std::nullopt;
        const auto v = recv_value(s, k);
        return v ? render_value(*m_, m_->connectors[k].type, *v) : std::string("-");
    }
    if (parts.size() != 2)
        return std::nullopt;
    const int c = m_->find_component(parts[0]);
    if (c < 0)
        return std::nullopt;
    const auto& comp = m_->components[c];
    const int v = comp.find_var(parts[1]);
    if (v >= 0)
        return render_value(*m_, comp.vars[v].type, s.vars[c][v]);
    const int mi = comp.find_machine(parts[1]);
    if (mi >= 0) {
        const int leaf = s.config[global_machine(c, mi)];
        return leaf < 0 ? std::string("-") : comp.machines[mi].states[leaf].name;
    }
    return std::nullopt;
}

} // namespace coda
