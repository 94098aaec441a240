#pragma once

// Scenarios drive the kernel deterministically:
//
//   // comment
//   max-time 40
//   policy lex                 // lex | reverse | random:<seed>
//   observe WM.wmsm, CP.display
//   at 1 fire CP.UserStart with pid=QUICK
//   expect deadlock
//
// Each cycle fires the scheduled environment events due now, then keeps
// firing the policy's choice among the other enabled events until only tick
// (or nothing) is left, then ticks.

#include "coda/kernel.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace coda {

struct ScheduledFire
{
    Time at = 0;
    std::string event;
    std::map<std::string, std::string> bindings;
    int line = 0;
};

struct Scenario
{
    std::vector<ScheduledFire> fires; // sorted by time, stable
    std::vector<std::string> observe;
    Time max_time = 10;
    bool expect_deadlock = false;
    std::string policy = "lex";
    std::string text; // source, for hashing
};

Scenario parse_scenario(const std::string& text, const std::string& file = {});

struct Policy
{
    enum class Kind { Lex, Reverse, Random };
    Kind kind = Kind::Lex;
    std::uint64_t seed = 0;
    static Policy parse(const std::string& text); // throws Error("BadPolicy")
};

struct RunOptions
{
    std::optional<std::string> policy;    // overrides the scenario's
    std::optional<Time> max_time;         // overrides the scenario's
    int max_steps_per_cycle = 10000;
};

struct RunResult
{
    std::vector<EventRecord> records;
    // observations[i] holds the scenario's observables after records[i].
    std::vector<std::vector<std::string>> observations;
    RuntimeState final_state;
    bool deadlocked = false;
    std::string deadlock_reason;
};

// Throws Error("ScheduleUnsatisfiable"), Error("Livelock"), runtime errors
// from the kernel, and Error("UnknownObservable").
RunResult run(const Kernel& k, const Scenario& sc, const RunOptions& opts = {});

// Orders candidate events the way `policy` would pick them (first = chosen).
void order_by_policy(const Kernel& k, std::vector<Event>& events, const Policy& p, std::uint64_t& rng_state);

// Re-executes recorded events. Each record is matched by event name,
// bindings and linked transitions. Throws Error("ReplayMismatch").
RuntimeState replay(const Kernel& k, const std::vector<EventRecord>& records);

// Trace files: JSON lines, a header followed by one record per line.
std::string trace_to_jsonl(const Model& m, const std::vector<EventRecord>& records);
std::vector<EventRecord> trace_from_jsonl(const std::string& text);

} // namespace coda
