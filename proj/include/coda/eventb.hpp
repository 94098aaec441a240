#pragma once

// Event-B text for a validated model: a context (sets, constants, axioms,
// WakeKind, one leaf enumeration per state machine) and a machine.
//
// Machine variables: current_time, one partial function per connector, one
// `<C>_wakeup` per component, one variable per state machine and one
// `<C>_<x>` per component variable. Sync flags and pending method counters
// follow a `// bookkeeping` line. A received value is a local event parameter
// `<connector>_v` bound by an equality guard.

#include "coda/refine.hpp"

#include <string>

namespace coda {

struct EmittedModel
{
    std::string name;
    std::string context; // <name>.ctx.eventb
    std::string machine; // <name>.mch.eventb
};

// Throws Error("UnsupportedConstruct") with the offending span in the message.
EmittedModel emit(const Model& m);
// Adds the `refines` clauses, event refinement annotations and gluing invariants.
EmittedModel emit_refinement(const RefinementSpec& spec);

// Writes both files into `dir`; returns their paths.
std::vector<std::string> write_emitted(const EmittedModel& e, const std::string& dir);

} // namespace coda
