#include "coda/loader.hpp"

#include "coda/parser.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace coda {

namespace fs = std::filesystem;

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("IOError", "cannot read `" + path + "`");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content)
{
    const fs::path p(path);
    if (p.has_parent_path())
        fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("IOError", "cannot write `" + path + "`");
    out << content;
}

Model load_model_text(const std::string& text, const std::string& name, const ValidateOptions& opts)
{
    return validated(parse_or_throw(text, name), opts);
}

Model load_model(const std::string& path, const ValidateOptions& opts)
{
    Model m = parse_or_throw(read_file(path), path);
    if (!m.refines) {
        fs::path side = fs::path(path).replace_extension(".refines");
        if (fs::exists(side)) {
            Diagnostics diags;
            auto decl = parse_refines(read_file(side.string()), side.string(), diags);
            if (!decl || has_errors(diags))
                throw DiagnosticError(std::move(diags));
            m.refines = std::move(*decl);
        }
    }
    return validated(std::move(m), opts);
}

Model load_abstract(Model& concrete, const ValidateOptions& opts)
{
    if (!concrete.refines)
        throw Error("NoRefinement", "model `" + concrete.name + "` has no `refines` clause");
    fs::path p(concrete.refines->path);
    if (p.is_relative() && !concrete.file.empty())
        p = fs::path(concrete.file).parent_path() / p;
    return load_model(p.string(), opts);
}

} // namespace coda
