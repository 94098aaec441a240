#pragma once

// Textual `.coda` format: recursive-descent parser and canonical printer.

#include "coda/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace coda {

struct ParseResult
{
    std::optional<Model> model; // set iff no errors
    Diagnostics diagnostics;
};

ParseResult parse(std::string_view text, const std::string& file = {});

// Parses a standalone refinement declaration (`refines "x.coda" { ... }`).
std::optional<RefinesDecl> parse_refines(std::string_view text, const std::string& file, Diagnostics& out);

// parse() that throws DiagnosticError.
Model parse_or_throw(std::string_view text, const std::string& file = {});

// Canonical text. parse(print(m)) == m for every parsed model.
std::string print(const Model& m);

} // namespace coda

namespace coda {

std::uint64_t fnv1a64(std::string_view bytes);
// Hash of the canonical text; insensitive to formatting and comments.
std::string model_hash(const Model& m);

} // namespace coda
