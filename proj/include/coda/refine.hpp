#pragma once

// Bounded refinement checking by forward simulation.
//
// The concrete model is explored; alongside every concrete state the checker
// keeps the set of abstract states that glue to it. A concrete step mapped to
// abstract event `a` must be matched by `a` from one of those states, landing
// in a glued state; a `new` step must keep the abstract state glued as is;
// tick matches tick.
//
// Gluing is the conjunction of
//   - the state map: each concrete state lies within its abstract image,
//   - equal values for variables present on both sides (same component and name),
//   - equal pending and current values on connectors present on both sides,
//   - the declared `glue` expressions.
// Wake queues are not glued.

#include "coda/checker.hpp"

#include <map>
#include <string>
#include <vector>

namespace coda {

struct RefinementSpec
{
    const Model* abstract = nullptr;
    const Model* concrete = nullptr;
    // Every concrete event ("C.op", "C.sm.t" for unlinked transitions) mapped
    // to an abstract event name or "new".
    std::map<std::string, std::string> event_map;
    std::vector<Expr> glue; // resolved against the pair
    // Per concrete global machine: abstract global machine, -1 when not glued.
    std::vector<int> machine_map;
    // Per concrete global machine and concrete state: abstract state index.
    std::vector<std::vector<int>> state_map;
};

// Builds the spec from `concrete.refines`. Throws DiagnosticError
// (UnmappedEvent, UnmappedState, GluingIllTyped, UnresolvedName).
RefinementSpec make_spec(const Model& concrete, const Model& abstract);
// Identity refinement of a model by itself.
RefinementSpec identity_spec(const Model& m);

// `in(C.sm.S) => abs.in(C.sm.A)` for every concrete state S of the machine
// that the abstract machine does not have, A being its nearest ancestor the
// abstract machine does have. `TRUE` when the machines have the same states.
Expr derive_state_gluing(const Model& concrete, int comp, int machine, const Model& abstract);

struct RefineConfig
{
    Time max_time = 20;
    size_t max_states = 400000;
    int env_bound = 2; // concrete side; the abstract environment is unbounded
};

struct RefineResult
{
    Verdict verdict = Verdict::Holds;
    std::string reason;
    // Counterexample: concrete trace ending with the unmatched step (replayable
    // on the concrete model), the abstract event each step was matched with,
    // and the candidate abstract configurations before that step.
    std::vector<EventRecord> trace;
    std::vector<std::string> abstract_steps;
    std::vector<std::string> abstract_states;
    size_t states = 0;
    size_t edges = 0;
    double seconds = 0;
    bool exhausted = false;
    // Abstract events that fire when the abstract model runs alone but were
    // never matched by the concrete model within the same bounds.
    std::vector<std::string> unmatched_abstract;
};

RefineResult check_refinement(const RefinementSpec& spec, const RefineConfig& cfg = {});
std::string refinement_report(const RefinementSpec& spec, const RefineResult& r);

} // namespace coda
