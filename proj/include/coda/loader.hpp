#pragma once

// Reading models from disk, including the abstract side of a refinement.

#include "coda/model.hpp"
#include "coda/validate.hpp"

#include <string>

namespace coda {

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Parses and validates. Throws DiagnosticError, or Error("IOError").
Model load_model(const std::string& path, const ValidateOptions& opts = {});
Model load_model_text(const std::string& text, const std::string& name = "<input>",
                      const ValidateOptions& opts = {});

// The model named by `concrete.refines`, resolved relative to the concrete
// file. A `<stem>.refines` file next to the concrete model supplies the
// declaration when there is no inline block. Throws Error("NoRefinement").
Model load_abstract(Model& concrete, const ValidateOptions& opts = {});

} // namespace coda
