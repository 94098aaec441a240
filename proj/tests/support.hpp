#pragma once

#include "coda/loader.hpp"
#include "coda/parser.hpp"

#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace test {

inline std::string path(const std::string& rel)
{
    return std::string(CODA_SOURCE_DIR) + "/" + rel;
}

inline coda::Model load(const std::string& rel)
{
    return coda::load_model(path(rel));
}

inline const std::vector<std::string>& shipped_models()
{
    static const std::vector<std::string> names = {"wm0", "wm1", "wm2", "wm2_flawed", "wm3", "wm4", "io0", "io1"};
    return names;
}

// Random valid model text. Components exchange NAT, BOOL and enumerated
// values over random connectors; every delivery has a responder, every
// self-wake has an S operation, and synchronous machines cycle
// unconditionally, so runs only stop at the time bound.
class ModelGen
{
public:
    explicit ModelGen(std::uint64_t seed) : rng_(seed) {}

    std::string generate(const std::string& name)
    {
        std::ostringstream os;
        os << "model " << name << "\n\n";
        os << "context values {\n    set COLOR { RED, GREEN, BLUE }\n    constant CAP : NAT = " << pick(3, 7)
           << "\n}\n\n";
        const int ncomp = pick(1, 3);
        struct Con
        {
            std::string name, type;
            int from, to;
        };
        std::vector<Con> cons;
        if (ncomp > 1) {
            const int ncon = pick(1, 4);
            for (int i = 0; i < ncon; ++i) {
                int a = pick(0, ncomp - 1), b = pick(0, ncomp - 2);
                if (b >= a)
                    ++b;
                static const char* types[] = {"NAT", "BOOL", "COLOR"};
                cons.push_back({"k" + std::to_string(i), types[pick(0, 2)], a, b});
                os << "connector k" << i << " : " << cons.back().type << " from C" << a << " to C" << b << '\n';
            }
            os << '\n';
        }
        auto value_for = [&](const std::string& type) -> std::string {
            if (type == "NAT")
                return coin() ? "min(x + 1, CAP)" : std::to_string(pick(0, 3));
            if (type == "BOOL")
                return coin() ? "not b" : "TRUE";
            static const char* els[] = {"RED", "GREEN", "BLUE"};
            return els[pick(0, 2)];
        };
        auto sends = [&](int comp, std::ostringstream& out) {
            for (const auto& c : cons)
                if (c.from == comp && coin())
                    out << "        action port_send(" << c.name << ", " << value_for(c.type) << ", delay "
                        << pick(0, 2) << ")\n";
        };

        for (int c = 0; c < ncomp; ++c) {
            std::ostringstream body;
            body << "component C" << c << " {\n";
            const bool has_m = coin();
            const bool has_sync = coin();
            const bool sync_gated = has_sync && has_m && coin();
            body << "    var x : NAT = " << pick(0, 2) << "\n    var b : BOOL = FALSE\n";
            if (sync_gated)
                body << "    var booted : BOOL = FALSE\n";
            body << "    invariant x <= CAP\n";
            const int async_states = pick(2, 3);

            body << "    statemachine am async {\n        initial A0\n";
            for (int s = 0; s < async_states; ++s) {
                if (s == 1 && coin())
                    body << "        state A1 {\n            initial A1a\n            state A1a\n            state A1b\n"
                            "        }\n";
                else
                    body << "        state A" << s << '\n';
            }
            const int nenv = pick(1, 3);
            for (int e = 0; e < nenv; ++e) {
                const int from = pick(0, async_states - 1), to = pick(0, async_states - 1);
                body << "        transition t" << e << " : A" << from << " -> A" << to << " links env" << e << '\n';
            }
            body << "    }\n";

            if (has_sync) {
                body << "    statemachine sm sync {\n";
                body << (sync_gated ? "        initial Y0 links boot\n" : "        initial Y0\n");
                body << "        state Y0\n        state Y1\n";
                body << "        transition up : Y0 -> Y1 links up\n        transition down : Y1 -> Y0 links down\n";
                body << "    }\n";
                body << "    operation up kind T {\n        action x := min(x + 1, CAP)\n";
                sends(c, body);
                body << "    }\n    operation down kind T {\n        action b := not b\n    }\n";
            }

            for (int e = 0; e < nenv; ++e) {
                body << "    operation env" << e << " kind E {\n";
                const bool param = coin();
                if (param)
                    body << "        param p : NAT in 0.." << pick(1, 2) << '\n';
                if (coin())
                    body << "        guard x < CAP\n";
                if (param)
                    body << "        action x := min(x + p, CAP)\n";
                if (coin())
                    body << "        action self_wake(delay " << pick(0, 3) << ")\n";
                if (has_m && coin())
                    body << "        action call meth\n";
                sends(c, body);
                body << "    }\n";
            }
            body << "    operation wake kind S {\n        action b := not b\n";
            if (has_m && coin())
                body << "        action call meth\n";
            sends(c, body);
            body << "    }\n";
            if (has_m) {
                body << "    operation meth kind M {\n        action x := min(x + 1, CAP)\n";
                if (coin())
                    body << "        action call inner\n";
                body << "    }\n    operation inner kind M {\n        action b := TRUE\n    }\n";
                if (sync_gated)
                    body << "    operation boot kind M\n    operation power kind E {\n        guard booted = FALSE\n"
                            "        action booted := TRUE\n        action call boot\n    }\n";
            }

            for (const auto& con : cons) {
                if (con.to != c)
                    continue;
                if (coin()) {
                    body << "    operation on_" << con.name << " kind P wakes " << con.name << " {\n";
                    if (con.type == "NAT")
                        body << "        action x := min(recv(" << con.name << "), CAP)\n";
                    else if (con.type == "BOOL")
                        body << "        action b := recv(" << con.name << ")\n";
                    body << "    }\n";
                } else {
                    std::string yes, no;
                    if (con.type == "NAT") {
                        yes = "recv(" + con.name + ") >= 2";
                        no = "recv(" + con.name + ") < 2";
                    } else if (con.type == "BOOL") {
                        yes = "recv(" + con.name + ") = TRUE";
                        no = "recv(" + con.name + ") = FALSE";
                    } else {
                        yes = "recv(" + con.name + ") = RED";
                        no = "not (recv(" + con.name + ") = RED)";
                    }
                    body << "    operation hi_" << con.name << " kind P wakes " << con.name << " {\n        guard "
                         << yes << "\n        action x := min(x + 1, CAP)\n";
                    if (coin())
                        body << "        action self_wake(delay " << pick(1, 2) << ")\n";
                    body << "    }\n";
                    body << "    operation lo_" << con.name << " kind P wakes " << con.name << " {\n        guard "
                         << no << "\n    }\n";
                }
            }
            body << "}\n\n";
            os << body.str();
        }
        return os.str();
    }

    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin() { return pick(0, 1) == 1; }
    std::mt19937_64& rng() { return rng_; }

private:
    std::mt19937_64 rng_;
};

} // namespace test
