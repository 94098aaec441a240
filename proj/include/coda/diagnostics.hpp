#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace coda {

struct SourceSpan
{
    std::string file;
    int start_line = 0;
    int start_col = 0;
    int end_line = 0;
    int end_col = 0;

    // Spans never take part in structural comparison of the IR: two models
    // parsed from differently formatted text compare equal.
    friend bool operator==(const SourceSpan&, const SourceSpan&) { return true; }

    [[nodiscard]] std::string str() const;
};

enum class Severity { Error, Warning };

struct Diagnostic
{
    Severity severity = Severity::Error;
    std::string code;    // machine-readable, e.g. "UnresolvedName"
    std::string message;
    SourceSpan span;

    [[nodiscard]] std::string str() const;
};

using Diagnostics = std::vector<Diagnostic>;

[[nodiscard]] bool has_errors(const Diagnostics& diags);
[[nodiscard]] std::string format(const Diagnostics& diags);

// Thrown by every layer above parsing/validation. `code` is one of the
// documented error names (NotEnabled, StaleGolden, ...).
class Error : public std::runtime_error
{
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code))
    {
    }

    [[nodiscard]] const std::string& code() const { return code_; }

private:
    std::string code_;
};

// Parse or validation failed; carries the full diagnostic list.
class DiagnosticError : public Error
{
public:
    explicit DiagnosticError(Diagnostics diags)
        : Error(diags.empty() ? "Invalid" : diags.front().code, format(diags)), diags_(std::move(diags))
    {
    }

    [[nodiscard]] const Diagnostics& diagnostics() const { return diags_; }

private:
    Diagnostics diags_;
};

} // namespace coda
