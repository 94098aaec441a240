#pragma once

#include "coda/model.hpp"

namespace coda {

struct ValidateOptions
{
    // Magnitude above which integer literals/constants draw an overflow
    // warning; the kernel raises a runtime error past the same bound.
    Value int_bound = kDefaultIntBound;
};

// Resolves every name in `model`, type-checks all expressions and checks
// the structural invariants. Returns every diagnostic found, not just the
// first. On success (no errors) `model.validated` is set. Idempotent.
Diagnostics validate(Model& model, const ValidateOptions& opts = {});

// validate() that throws DiagnosticError on any error.
Model validated(Model raw, const ValidateOptions& opts = {});

// Type of `expr` evaluated in the scope of component `component` (own
// variables, constants, carrier elements, own states, incoming connectors).
// Throws Error("UnresolvedName" | "TypeMismatch") naming the sub-expression.
ValueType type_of(const Model& model, const std::string& component, const Expr& expr);

// Resolves an expression over a concrete/abstract model pair. Names must be
// qualified (`C.x`, `in(C.S)`); the `abs.` prefix selects the abstract model.
// Constants and carrier elements resolve in the concrete model.
void resolve_joint(const Model& concrete, const Model& abstract, Expr& expr, Diagnostics& out);

} // namespace coda
