#pragma once

// Golden traces.
//
//   coda-golden 1
//   model wm1
//   model-hash 3f0c9a17d2e4b861
//   scenario-hash 9d1e0b44a7c35f20
//   semantics coda-kernel/1
//   policy lex
//   observe WM.wmsm WMSTATE CP.display
//   records 3
//   0 0 CP.UserStart pid=QUICK | IDLE - WAITING
//   1 0 WM.sendWaiting | IDLE - WAITING
//   2 0 tick | IDLE WAITING WAITING
//   end
//
// A record is `<index> <time> <event> [<param>=<value> ...] | <observed ...>`,
// one value per observable in header order. A run that stops on an expected
// deadlock adds `deadlock <time>` before `end`. Files are LF-only.

#include "coda/refine.hpp"
#include "coda/scenario.hpp"

#include <optional>
#include <string>
#include <vector>

namespace coda {

inline constexpr const char* kSemantics = "coda-kernel/1";

struct GoldenRecord
{
    Time time = 0;
    std::string event; // name followed by ` param=value` bindings
    std::vector<std::string> values;
    friend bool operator==(const GoldenRecord&, const GoldenRecord&) = default;
};

struct Golden
{
    std::string model;
    std::string model_hash;
    std::string scenario_hash;
    std::string semantics = kSemantics;
    std::string policy = "lex";
    std::vector<std::string> observe;
    std::vector<GoldenRecord> records;
    std::optional<Time> deadlock;
};

std::string golden_to_text(const Golden& g);
// Throws Error("FormatError") with the offending line number.
Golden golden_from_text(const std::string& text);

// Hash of the scenario's content (schedule, bounds, policy, observables);
// comments and layout do not count.
std::string scenario_hash(const Scenario& sc);

GoldenRecord golden_record(const EventRecord& r, std::vector<std::string> values);

// Runs the scenario with its observation set. Throws Error("DeadlockReached")
// unless the scenario expects one.
Golden record(const Model& m, const Scenario& sc, const RunOptions& opts = {});

// Golden of an interactive trace. With a scenario, the header carries its
// hash and policy, so that replaying a scenario by hand reproduces the
// recorded golden byte for byte; otherwise the policy is `manual` and the
// hash covers the environment events of the trace. Throws Error("ReplayMismatch").
Golden golden_from_trace(const Model& m, const std::vector<EventRecord>& trace, const std::vector<std::string>& observe,
                         const Scenario* sc = nullptr);

struct Divergence
{
    size_t index = 0;
    Time time = 0;
    std::optional<GoldenRecord> expected; // empty past the end of the golden
    std::optional<GoldenRecord> actual;   // empty past the end of the run
    std::vector<std::string> context;     // expected/actual lines around the index
    std::string str() const;
};

struct CompareOptions
{
    // Compare against a golden recorded from an earlier version of the model
    // instead of failing with StaleGolden.
    bool accept_model_change = false;
};

// std::nullopt when the run matches the golden. Throws Error("StaleGolden")
// on a header mismatch and Error("FormatError") when an observable of the
// golden does not exist in the model.
std::optional<Divergence> compare(const Model& m, const Scenario& sc, const Golden& g, const CompareOptions& opts = {});

struct Projection
{
    // Abstract observable -> concrete observable. Observables without an entry
    // are matched by name; a concrete state machine reports the image of its
    // leaf in the abstract machine.
    std::map<std::string, std::string> observe;
    // Fewest non-tick events that must survive the projection.
    size_t min_matches = 1;
};

// Runs `sc` on the concrete model, drops `new` events, renames the others
// after the event map and compares with the abstract golden. Throws as
// compare, plus Error("UnmappedObservation") and Error("VacuousProjection").
std::optional<Divergence> compare_refinement(const RefinementSpec& spec, const Scenario& sc, const Golden& abstract_golden,
                                             const Projection& proj = {}, const CompareOptions& opts = {});

} // namespace coda
