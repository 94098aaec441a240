#pragma once

// Bounded explicit-state exploration: invariants, deadlock, runtime errors
// and transition coverage.

#include "coda/kernel.hpp"

#include <string>
#include <vector>

namespace coda {

struct CheckConfig
{
    Time max_time = 20;
    size_t max_states = 500000;
    int env_bound = 4;
    bool invariants = true;
    bool deadlock = true;
    bool strict_collisions = false;
    // Relative-time keys over pruned states. Off: absolute keys, no pruning.
    bool canonical = true;
    bool all_violations = false;
};

enum class Verdict { Holds, Violated, BoundExhausted };

const char* verdict_name(Verdict v); // holds-within-bounds | violated | bound-exhausted

struct Violation
{
    std::string property; // invariant | deadlock | runtime-error
    std::string description;
    std::vector<EventRecord> trace; // from the initial state to the violating state
    std::string configuration;      // active states, e.g. "WM.wmsm=INPROGRESS DOOR.doorsm=DOORUNLOCKED"
};

struct CoverageItem
{
    std::string name; // C.sm.t or C.op
    bool transition = true;
    size_t count = 0;
};

struct CheckResult
{
    Verdict invariants = Verdict::Holds;
    Verdict deadlock = Verdict::Holds;
    Verdict runtime_errors = Verdict::Holds;
    std::vector<Violation> violations;
    std::vector<CoverageItem> coverage;
    size_t states = 0;
    size_t edges = 0;
    size_t frontier_peak = 0;
    double seconds = 0;
    bool exhausted = false;

    bool ok() const { return violations.empty(); }
    double transition_coverage() const; // 1.0 when the model has no transitions
    double operation_coverage() const;
    bool full_transition_coverage() const { return transition_coverage() >= 1.0; }
};

CheckResult explore(const Model& m, const CheckConfig& cfg);

// Every transition and operation with its firing count; 100% is flagged.
std::string coverage_report(const CheckResult& r);
std::string check_summary(const CheckResult& r);

// "C.sm=LEAF ..." for every machine.
std::string configuration_text(const Kernel& k, const RuntimeState& s);

} // namespace coda
