#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace torsec {

/// A flow on the flat torus T^d (d = 2 or 3) with unit period lattice.
/// Either one of the builtin fields (identified by name, with named real
/// parameters) or a grid-sampled vector table with periodic multilinear
/// interpolation. Evaluation is periodic by construction.
struct FlowSpec {
    enum class Kind {
        constant,     // v = (ax, ay[, az])
        reeb2d,       // v = (k sin(2 pi x), 1)
        slowed_vertical, // v = (0, lambda), lambda vanishing exactly at (0,0), (1/2,0)
        psi1,         // v = (ax, ay) * lambda_{p0}, p0 = (0,0)
        figure1_phi1, // v = (k sin(2 pi x), 1): two invariant vertical circles
        figure1_phi2, // v = (k sin^2(pi x), 1): one invariant vertical circle
        psi2,         // 3D: layered horizontal fields + mu sin(4 pi z) vertical drift
        table,        // grid-sampled components, multilinear periodic interpolation
    };

    Kind kind = Kind::constant;
    int dim = 2;
    std::map<std::string, double> params; // ordered: deterministic serialization

    // Table data (kind == table only).
    std::array<int, 3> table_res{0, 0, 0};
    std::vector<double> table; // node-major, dim components per node

    /// Builtin by catalog name; unknown names / bad params raise ConfigError.
    static FlowSpec builtin(const std::string& name,
                            const std::map<std::string, double>& overrides = {});

    /// Reads a vector table: header "torsec-table v1", "dim D", "resolution ...",
    /// then one line of D components per node, x fastest.
    static FlowSpec from_table(std::istream& in);

    std::string name() const;

    /// v(x) for x anywhere in R^d (argument is wrapped internally).
    void eval(const double* x, double* out) const;

    /// Catalog parameter defaults for a builtin name.
    static std::map<std::string, double> default_params(const std::string& name);
};

/// Fixed-step classical 4th-order integration of the lifted field for time T.
/// `x` is the start in R^d; the result is the lifted endpoint in R^d (not
/// wrapped), so endpoint - x is the exact cover displacement. Raises
/// AnalysisError on non-finite field values.
std::array<double, 3> integrate_lift(const FlowSpec& flow, const std::array<double, 3>& x,
                                     double T, int steps);

/// One entry of the builtin example catalog.
struct ExampleInfo {
    std::string name;
    int dim;
    std::array<int, 3> default_resolution;
    std::map<std::string, double> params;
    std::vector<std::array<std::int64_t, 3>> suggested_alphas;
    std::string note; // behavioral description: dynamics and expected verdicts
};

const std::vector<ExampleInfo>& builtin_examples();

} // namespace torsec
