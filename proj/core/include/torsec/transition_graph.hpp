#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "torsec/flow.hpp"
#include "torsec/graph.hpp"

namespace torsec {

/// Uniform box cover of T^d with per-axis resolution and wrap-around indexing.
/// Cells are indexed x-fastest: id = x + res0 * (y + res1 * z).
struct GridSpec {
    int dim = 2;
    std::array<int, 3> res{1, 1, 1};

    std::int64_t cell_count() const {
        std::int64_t n = 1;
        for (int i = 0; i < dim; ++i) n *= res[i];
        return n;
    }
    double cell_diameter() const;

    std::array<int, 3> coords(std::int64_t cell) const;
    std::int64_t index(const std::array<int, 3>& c) const;
    /// Center of the cell in the fundamental domain [0,1)^d.
    std::array<double, 3> center(std::int64_t cell) const;
};

struct BuildParams {
    double T = 0.5;
    double epsilon = -1.0; // < 0 means "auto" = cell diameter
    int rk_steps = 32;
    int samples_per_cell = 1; // 1 = center only; > 1 adds the 2^d cell corners
    int threads = 1;
    std::int64_t max_cells = 0; // 0 = use the TORSEC_MAX_CELLS env var / default
};

/// The (epsilon, T)-pseudo-orbit transition graph: one vertex per grid cell,
/// one edge per (time-T flow segment + jump of size <= epsilon), weighted by
/// the integer winding of the closed-up segment. Keeps the flow and build
/// parameters so analyses can refine it.
struct TransitionGraph {
    WeightedDigraph g;
    GridSpec grid;
    FlowSpec flow;
    double T = 0.5;
    double epsilon = 0.0;
    int rk_steps = 32;
    int samples_per_cell = 1;
    int threads = 1;
};

/// Builds the transition graph. Edge (u -> v) exists iff some sample point of
/// cell u flows for time T to a point within epsilon (torus metric) of cell v;
/// the winding is round(lifted_endpoint - center(v)) componentwise, i.e. the
/// jump closes to the nearest cover representative (ties toward zero).
/// Errors: epsilon >= 1/2, epsilon < cell diameter, T <= 0, resolution < 1,
/// cell count above the resource cap.
TransitionGraph build_transition_graph(const FlowSpec& flow, const GridSpec& grid,
                                       const BuildParams& params);

/// Rebuilds at resolution * factor with epsilon = the refined cell diameter.
TransitionGraph refine(const TransitionGraph& tg, int factor = 2);

/// Resource cap: explicit value if set, else TORSEC_MAX_CELLS, else 2^22.
std::int64_t resolve_cell_cap(std::int64_t explicit_cap);

/// Versioned text interchange format (header + one line per edge:
/// "e u v k0 k1 [k2]"), sorted deterministically.
void export_graph(std::ostream& out, const TransitionGraph& tg);
void export_graph(std::ostream& out, const WeightedDigraph& g);

struct ImportedGraph {
    WeightedDigraph g;
    std::optional<GridSpec> grid;
    double T = 0.0;
    double epsilon = 0.0;
};
ImportedGraph import_graph(std::istream& in);

} // namespace torsec
