#include "coda/refine.hpp"

#include "coda/eval.hpp"
#include "coda/validate.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

namespace coda {

namespace {

// Concrete event names: operations plus unlinked transitions.
std::vector<std::string> event_names(const Model& m)
{
    std::vector<std::string> out;
    for (const auto& c : m.components) {
        for (const auto& op : c.operations)
            out.push_back(c.name + "." + op.name);
        for (const auto& sm : c.machines)
            for (const auto& t : sm.transitions)
                if (t.link.empty() && !t.is_initial())
                    out.push_back(c.name + "." + sm.name + "." + t.name);
    }
    return out;
}

int global_index(const Model& m, int comp, int machine)
{
    int g = 0;
    for (int c = 0; c < comp; ++c)
        g += static_cast<int>(m.components[c].machines.size());
    return g + machine;
}

// Nearest state (self first, then ancestors) whose name the abstract machine has.
int image_of(const StateMachine& csm, int s, const StateMachine& asm_, const std::map<std::string, std::string>& explicit_map,
             std::string* via_name)
{
    for (int cur = s; cur >= 0; cur = csm.states[cur].parent) {
        auto it = explicit_map.find(csm.states[cur].name);
        const std::string& want = it != explicit_map.end() ? it->second : csm.states[cur].name;
        const int a = asm_.find_state(want);
        if (a >= 0) {
            if (via_name)
                *via_name = want;
            return a;
        }
        if (it != explicit_map.end())
            return -1; // explicit target that does not exist
    }
    return -1;
}

void fill_structure(RefinementSpec& spec, const std::map<std::string, std::string>& explicit_states, Diagnostics& diags)
{
    const Model& c = *spec.concrete;
    const Model& a = *spec.abstract;
    std::set<std::pair<int, int>> matched_abstract;
    for (size_t ci = 0; ci < c.components.size(); ++ci) {
        const auto& comp = c.components[ci];
        const int ac = a.find_component(comp.name);
        for (size_t mi = 0; mi < comp.machines.size(); ++mi) {
            const auto& csm = comp.machines[mi];
            spec.machine_map.push_back(-1);
            spec.state_map.emplace_back(csm.states.size(), -1);
            const int am = ac >= 0 ? a.components[ac].find_machine(csm.name) : -1;
            if (am < 0)
                continue;
            matched_abstract.insert({ac, am});
            spec.machine_map.back() = global_index(a, ac, am);
            const auto& asm_ = a.components[ac].machines[am];
            std::map<std::string, std::string> local;
            for (const auto& [k, v] : explicit_states)
                if (k.rfind(comp.name + "." + csm.name + ".", 0) == 0)
                    local[k.substr(comp.name.size() + csm.name.size() + 2)] = v;
            for (const auto& [k, v] : local)
                if (csm.find_state(k) < 0)
                    diags.push_back({Severity::Error, "UnmappedState",
                                     "state map names unknown concrete state `" + comp.name + "." + csm.name + "." + k + "`", {}});
            for (size_t s = 0; s < csm.states.size(); ++s) {
                const int img = image_of(csm, static_cast<int>(s), asm_, local, nullptr);
                spec.state_map.back()[s] = img;
                if (img < 0 && csm.states[s].children.empty())
                    diags.push_back({Severity::Error, "UnmappedState",
                                     "concrete state `" + comp.name + "." + csm.name + "." + csm.states[s].name +
                                         "` has no abstract counterpart; add `state " + comp.name + "." + csm.name + "." +
                                         csm.states[s].name + " -> <abstract state>`",
                                     csm.states[s].span});
            }
        }
    }
    for (size_t ac = 0; ac < a.components.size(); ++ac)
        for (size_t am = 0; am < a.components[ac].machines.size(); ++am)
            if (!matched_abstract.count({static_cast<int>(ac), static_cast<int>(am)}))
                diags.push_back({Severity::Error, "UnmappedState",
                                 "abstract machine `" + a.components[ac].name + "." + a.components[ac].machines[am].name +
                                     "` has no concrete counterpart",
                                 a.components[ac].machines[am].span});
}

} // namespace

RefinementSpec make_spec(const Model& concrete, const Model& abstract)
{
    RefinementSpec spec;
    spec.concrete = &concrete;
    spec.abstract = &abstract;
    Diagnostics diags;
    std::map<std::string, std::string> declared;
    std::map<std::string, std::string> states;
    if (concrete.refines) {
        for (const auto& e : concrete.refines->events)
            declared[e.concrete] = e.abstract;
        for (const auto& s : concrete.refines->states)
            states[s.concrete] = s.abstract;
    }
    const auto cnames = event_names(concrete);
    const auto anames = event_names(abstract);
    const std::set<std::string> aset(anames.begin(), anames.end());
    const std::set<std::string> cset(cnames.begin(), cnames.end());
    for (const auto& [k, v] : declared) {
        if (!cset.count(k))
            diags.push_back({Severity::Error, "UnmappedEvent", "event map names unknown concrete event `" + k + "`", {}});
        else if (v != "new" && !aset.count(v))
            diags.push_back({Severity::Error, "UnmappedEvent",
                             "`" + k + "` is mapped to `" + v + "`, which the abstract model does not have", {}});
    }
    for (const auto& n : cnames) {
        if (auto it = declared.find(n); it != declared.end())
            spec.event_map[n] = it->second;
        else if (aset.count(n))
            spec.event_map[n] = n;
        else
            diags.push_back({Severity::Error, "UnmappedEvent",
                             "concrete event `" + n + "` has no abstract counterpart; map it with `event " + n +
                                 " -> <abstract event>` or `-> new`",
                             {}});
    }
    fill_structure(spec, states, diags);
    if (concrete.refines)
        for (auto g : concrete.refines->glue) {
            resolve_joint(concrete, abstract, g, diags);
            spec.glue.push_back(std::move(g));
        }
    if (has_errors(diags))
        throw DiagnosticError(std::move(diags));
    return spec;
}

RefinementSpec identity_spec(const Model& m)
{
    RefinementSpec spec;
    spec.concrete = &m;
    spec.abstract = &m;
    for (const auto& n : event_names(m))
        spec.event_map[n] = n;
    Diagnostics diags;
    fill_structure(spec, {}, diags);
    return spec;
}

Expr derive_state_gluing(const Model& concrete, int comp, int machine, const Model& abstract)
{
    const auto& c = concrete.components.at(comp);
    const auto& csm = c.machines.at(machine);
    const int ac = abstract.find_component(c.name);
    const int am = ac >= 0 ? abstract.components[ac].find_machine(csm.name) : -1;
    if (am < 0)
        throw Error("UnmappedState", "abstract model has no machine `" + c.name + "." + csm.name + "`");
    const auto& asm_ = abstract.components[ac].machines[am];
    std::optional<Expr> out;
    for (size_t s = 0; s < csm.states.size(); ++s) {
        if (asm_.find_state(csm.states[s].name) >= 0)
            continue;
        std::string image;
        if (image_of(csm, static_cast<int>(s), asm_, {}, &image) < 0)
            throw Error("UnmappedState", "concrete state `" + csm.states[s].name + "` has no abstract counterpart");
        Expr lhs;
        lhs.kind = ExprKind::InState;
        lhs.path = {c.name, csm.name, csm.states[s].name};
        Expr rhs = lhs;
        rhs.path.back() = image;
        rhs.abstract_side = true;
        Expr conj = Expr::binary(BinOp::Implies, std::move(lhs), std::move(rhs));
        out = out ? Expr::binary(BinOp::And, std::move(*out), std::move(conj)) : std::move(conj);
    }
    return out ? *out : Expr::boolean(true);
}

namespace {

struct Joint
{
    const Kernel& ck;
    const Kernel& ak;
    const RuntimeState& cs;
    const RuntimeState& as;

    Value var(const Expr& e) const { return (e.abstract_side ? as : cs).vars[e.comp][e.index]; }
    Value param(int) const { return 0; }
    std::optional<Value> recv(int c) const { return ck.recv_value(cs, c); }
    bool in_state(const Expr& e) const
    {
        const Kernel& k = e.abstract_side ? ak : ck;
        const RuntimeState& s = e.abstract_side ? as : cs;
        const int g = k.global_machine(e.comp, e.machine);
        return s.config[g] >= 0 && k.machine_of(g).within(s.config[g], e.state);
    }
    Value bound() const { return ck.options().int_bound; }
};

class Checker
{
public:
    Checker(const RefinementSpec& spec, const RefineConfig& cfg)
        : spec_(spec), cfg_(cfg), ck_(*spec.concrete, concrete_opts(cfg)), ak_(*spec.abstract, abstract_opts())
    {
        const Model& c = *spec.concrete;
        const Model& a = *spec.abstract;
        for (size_t ci = 0; ci < c.components.size(); ++ci) {
            const int ac = a.find_component(c.components[ci].name);
            if (ac < 0)
                continue;
            for (size_t v = 0; v < c.components[ci].vars.size(); ++v) {
                const int av = a.components[ac].find_var(c.components[ci].vars[v].name);
                if (av >= 0)
                    shared_vars_.push_back({static_cast<int>(ci), static_cast<int>(v), ac, av});
            }
        }
        for (size_t k = 0; k < c.connectors.size(); ++k)
            if (const int ak = a.find_connector(c.connectors[k].name); ak >= 0)
                shared_conns_.push_back({static_cast<int>(k), ak});
    }

    // Empty when glued; otherwise the first failing conjunct.
    std::string glue_failure(const RuntimeState& cs, const RuntimeState& as) const
    {
        const Model& c = *spec_.concrete;
        const Model& a = *spec_.abstract;
        for (size_t g = 0; g < spec_.machine_map.size(); ++g) {
            const int ag = spec_.machine_map[g];
            if (ag < 0)
                continue;
            const int cl = cs.config[g];
            const int al = as.config[ag];
            const auto& csm = ck_.machine_of(static_cast<int>(g));
            const auto& asm_ = ak_.machine_of(ag);
            const std::string where = c.components[ck_.comp_of_machine(static_cast<int>(g))].name + "." + csm.name;
            if (cl < 0 || al < 0) {
                if ((cl < 0) != (al < 0))
                    return "machine " + where + " is " + (cl < 0 ? "inactive" : csm.states[cl].name) +
                           " but the abstract machine is " + (al < 0 ? "inactive" : asm_.states[al].name);
                continue;
            }
            const int img = spec_.state_map[g][cl];
            if (img < 0 || !asm_.within(al, img))
                return "state " + where + "." + csm.states[cl].name + " requires abstract " +
                       (img < 0 ? std::string("?") : asm_.states[img].name) + ", abstract is in " + asm_.states[al].name;
        }
        for (const auto& v : shared_vars_) {
            const Value x = cs.vars[v.comp][v.var];
            const Value y = as.vars[v.acomp][v.avar];
            if (x != y) {
                const auto& var = c.components[v.comp].vars[v.var];
                return "variable " + c.components[v.comp].name + "." + var.name + " = " + render_value(c, var.type, x) +
                       " but abstract has " + render_value(a, a.components[v.acomp].vars[v.avar].type, y);
            }
        }
        for (auto [k, ak] : shared_conns_) {
            const auto& cm = cs.channels[k];
            const auto& am = as.channels[ak];
            bool same = ck_.recv_value(cs, k) == ak_.recv_value(as, ak);
            auto ci = cm.upper_bound(cs.now);
            auto ai = am.upper_bound(as.now);
            for (; same && (ci != cm.end() || ai != am.end()); ++ci, ++ai)
                same = ci != cm.end() && ai != am.end() && *ci == *ai;
            if (!same)
                return "connector " + c.connectors[k].name + " differs from the abstract connector";
        }
        Joint env{ck_, ak_, cs, as};
        for (const auto& g : spec_.glue) {
            std::optional<Value> v;
            try {
                v = evaluate(c, g, env);
            } catch (const Error&) {
            }
            if (!v || !*v)
                return "gluing `" + to_string(g) + "` is " + (v ? "false" : "undefined");
        }
        return {};
    }

    RefineResult run()
    {
        const auto t0 = std::chrono::steady_clock::now();
        RefineResult res;
        std::vector<RuntimeState> a0;
        const RuntimeState c0 = ck_.init();
        a0.push_back(ak_.init());
        if (auto why = glue_failure(c0, a0[0]); !why.empty()) {
            res.verdict = Verdict::Violated;
            res.reason = "initial states are not glued: " + why;
            res.abstract_states.push_back(configuration_text(ak_, a0[0]));
            res.seconds = elapsed(t0);
            return res;
        }
        visit(c0, std::move(a0), -1, nullptr, res);
        while (!buckets_.empty() && res.verdict != Verdict::Violated) {
            auto b = buckets_.begin();
            const int id = b->second.front();
            b->second.pop_front();
            if (b->second.empty())
                buckets_.erase(b);
            Node& n = nodes_[id];
            if (best_[n.key] < n.cs.now)
                continue;
            const RuntimeState cs = n.cs;
            const std::vector<RuntimeState> as = n.as;
            for (const auto& e : ck_.enabled(cs)) {
                if (e.kind == EventKind::Tick && cs.now >= cfg_.max_time)
                    continue;
                RuntimeState next = cs;
                EventRecord rec;
                try {
                    rec = ck_.fire_unchecked(next, e);
                } catch (const Error&) {
                    continue; // runtime errors are the model checker's concern
                }
                ++res.edges;
                std::string why;
                auto succ = match(e, next, as, why);
                if (succ.empty()) {
                    fail(id, rec, e, as, why, res);
                    break;
                }
                visit(std::move(next), std::move(succ), id, &e, res);
            }
        }
        res.states = best_.size();
        if (res.verdict != Verdict::Violated && res.exhausted)
            res.verdict = Verdict::BoundExhausted;
        res.seconds = elapsed(t0);
        return res;
    }

    const std::set<std::string>& matched() const { return matched_; }

private:
    struct SharedVar
    {
        int comp, var, acomp, avar;
    };
    struct Node
    {
        int parent = -1;
        Event via;
        std::string key;
        RuntimeState cs;
        std::vector<RuntimeState> as;
    };

    static KernelOptions concrete_opts(const RefineConfig& cfg)
    {
        KernelOptions o;
        o.env_bound = cfg.env_bound;
        return o;
    }
    static KernelOptions abstract_opts()
    {
        KernelOptions o;
        o.env_bound = std::numeric_limits<int>::max();
        return o;
    }
    static double elapsed(std::chrono::steady_clock::time_point t0)
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    std::string step_name(const Event& e) const
    {
        if (e.kind == EventKind::Tick)
            return "tick";
        auto it = spec_.event_map.find(ck_.event_name(e));
        return it == spec_.event_map.end() ? "new" : it->second;
    }

    std::vector<RuntimeState> match(const Event& e, const RuntimeState& cnext, const std::vector<RuntimeState>& as,
                                    std::string& why)
    {
        const std::string target = step_name(e);
        std::vector<RuntimeState> out;
        std::set<std::string> seen;
        auto keep = [&](RuntimeState s) {
            auto reason = glue_failure(cnext, s);
            if (!reason.empty()) {
                if (why.empty())
                    why = reason;
                return;
            }
            if (seen.insert(ak_.canonical_key(s)).second)
                out.push_back(std::move(s));
        };
        if (target == "new") {
            for (const auto& s : as)
                keep(s);
            return out;
        }
        const auto cb = ck_.bindings(e);
        bool any_enabled = false;
        for (const auto& s : as) {
            for (const auto& ae : ak_.enabled(s)) {
                if (ak_.event_name(ae) != target)
                    continue;
                bool binds = true;
                for (const auto& [n, v] : ak_.bindings(ae))
                    for (const auto& [cn, cv] : cb)
                        if (n == cn && v != cv)
                            binds = false;
                if (!binds)
                    continue;
                any_enabled = true;
                RuntimeState next = s;
                try {
                    ak_.fire_unchecked(next, ae);
                } catch (const Error& err) {
                    if (why.empty())
                        why = "abstract `" + target + "` fails: " + err.code() + ": " + err.what();
                    continue;
                }
                keep(std::move(next));
            }
        }
        if (!any_enabled) {
            why = "abstract `" + target + "` is not enabled";
            if (!as.empty()) {
                const auto blockers = target == "tick" ? ak_.tick_blockers(as.front()) : std::vector<std::string>{};
                for (const auto& b : blockers)
                    why += "; " + b;
            }
        }
        if (!out.empty())
            matched_.insert(target);
        return out;
    }

    void visit(RuntimeState cs, std::vector<RuntimeState> as, int parent, const Event* via, RefineResult& res)
    {
        std::vector<std::string> akeys;
        for (const auto& s : as)
            akeys.push_back(ak_.canonical_key(s));
        std::sort(akeys.begin(), akeys.end());
        std::string key = ck_.canonical_key(cs);
        for (const auto& k : akeys) {
            key += '\x1f';
            key += k;
        }
        auto it = best_.find(key);
        if (it != best_.end() && it->second <= cs.now)
            return;
        if (it == best_.end()) {
            if (best_.size() >= cfg_.max_states) {
                res.exhausted = true;
                return;
            }
            best_.emplace(key, cs.now);
        } else {
            it->second = cs.now;
        }
        Node n;
        n.parent = parent;
        if (via)
            n.via = *via;
        n.key = std::move(key);
        const Time t = cs.now;
        n.cs = std::move(cs);
        n.as = std::move(as);
        nodes_.push_back(std::move(n));
        buckets_[t].push_back(static_cast<int>(nodes_.size()) - 1);
    }

    void fail(int id, EventRecord last, const Event& e, const std::vector<RuntimeState>& as, const std::string& why,
              RefineResult& res)
    {
        std::vector<const Event*> path;
        for (int n = id; nodes_[n].parent >= 0; n = nodes_[n].parent)
            path.push_back(&nodes_[n].via);
        RuntimeState s = ck_.init();
        for (auto it = path.rbegin(); it != path.rend(); ++it) {
            res.abstract_steps.push_back(step_name(**it));
            res.trace.push_back(ck_.fire_unchecked(s, **it));
        }
        res.trace.push_back(std::move(last));
        res.abstract_steps.push_back(step_name(e));
        for (const auto& a : as)
            res.abstract_states.push_back(configuration_text(ak_, a));
        res.verdict = Verdict::Violated;
        res.reason = "no abstract step matches `" + ck_.event_name(e) + "` (as `" + step_name(e) + "`) at time " +
                     std::to_string(res.trace.back().time) + ": " + why;
    }

    const RefinementSpec& spec_;
    RefineConfig cfg_;
    Kernel ck_;
    Kernel ak_;
    std::vector<SharedVar> shared_vars_;
    std::vector<std::pair<int, int>> shared_conns_;
    std::vector<Node> nodes_;
    std::unordered_map<std::string, Time> best_;
    std::map<Time, std::deque<int>> buckets_;
    std::set<std::string> matched_;
};

} // namespace

RefineResult check_refinement(const RefinementSpec& spec, const RefineConfig& cfg)
{
    if (!spec.concrete || !spec.abstract)
        throw Error("BadConfig", "refinement spec needs both models");
    Checker ch(spec, cfg);
    RefineResult res = ch.run();
    if (res.verdict != Verdict::Violated) {
        CheckConfig alone;
        alone.max_time = cfg.max_time;
        alone.max_states = cfg.max_states;
        alone.env_bound = cfg.env_bound;
        alone.invariants = false;
        alone.deadlock = false;
        for (const auto& c : explore(*spec.abstract, alone).coverage)
            if (!c.transition && c.count && !ch.matched().count(c.name))
                res.unmatched_abstract.push_back(c.name);
    }
    return res;
}

std::string refinement_report(const RefinementSpec& spec, const RefineResult& r)
{
    std::ostringstream os;
    os << "refinement " << spec.concrete->name << " -> " << spec.abstract->name << ": " << verdict_name(r.verdict) << '\n'
       << "bounded forward simulation, not a proof\n"
       << "states: " << r.states << ", edges: " << r.edges << ", time: " << r.seconds << "s\n";
    if (r.verdict == Verdict::Violated) {
        os << r.reason << '\n';
        if (!r.trace.empty())
            os << "trace (concrete event -> abstract step):\n";
        for (size_t i = 0; i < r.trace.size(); ++i) {
            os << "  t=" << r.trace[i].time << ' ' << r.trace[i].event;
            for (const auto& [n, v] : r.trace[i].bindings)
                os << ' ' << n << '=' << v;
            os << " -> " << r.abstract_steps[i] << '\n';
        }
        os << (r.trace.empty() ? "abstract initial state(s):\n" : "abstract state(s) before the last step:\n");
        for (const auto& a : r.abstract_states)
            os << "  " << a << '\n';
    }
    if (!r.unmatched_abstract.empty()) {
        os << "abstract events never matched by the concrete model (possible guard strengthening):\n";
        for (const auto& n : r.unmatched_abstract)
            os << "  " << n << '\n';
    }
    return os.str();
}

} // namespace coda
