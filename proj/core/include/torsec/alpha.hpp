#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "torsec/covector.hpp"
#include "torsec/cycle_mean.hpp"
#include "torsec/graph.hpp"

namespace torsec {

/// Result of the homology-aware analysis for one class alpha.
///
/// Sign convention (the single orientation all inequalities derive from):
/// a potential p is feasible when p(v) - p(u) + w_alpha(u->v) >= 0 for every
/// edge — the lifted potential never decreases along the flow. `potentials`
/// stores such a feasible p (= -d for the Bellman distances d from a virtual
/// source). Tight edges are those with equality; alpha-recurrent vertices lie
/// on cycles of the tight subgraph, which are exactly the zero-alpha-weight
/// cycles.
struct AlphaAnalysis {
    Covector alpha;
    bool quasi_lyapunov_neg = false;
    std::vector<std::int64_t> potentials;      // defined iff quasi_lyapunov_neg
    std::vector<std::int32_t> recurrent;       // alpha-recurrent vertices, sorted
    std::vector<std::int32_t> chain_of;        // per vertex, -1 if not alpha-recurrent
    std::vector<std::vector<std::int32_t>> chains; // numbered by smallest vertex id
    std::vector<std::int32_t> witness_cycle;   // a negative cycle iff !quasi_lyapunov_neg
    std::int64_t witness_weight = 0;
};

/// alpha(winding of edge): plain dot product.
std::int64_t alpha_weight(const Winding& k, const Covector& alpha);

/// True iff the graph has no cycle of negative total alpha-weight.
bool is_quasi_lyapunov_neg(const WeightedDigraph& g, const Covector& alpha);

/// Full analysis; cheap to reuse across the operations below.
AlphaAnalysis analyze_alpha(const WeightedDigraph& g, const Covector& alpha);

/// Alpha-recurrent vertices and their chains. Refuses (AnalysisError) when
/// is_quasi_lyapunov_neg fails.
AlphaAnalysis alpha_recurrent(const WeightedDigraph& g, const Covector& alpha);

/// Minimum cycle mean of alpha-weights (support value of the asymptotic
/// direction set at this resolution; paper-units value is this divided by T).
/// Errors on acyclic graphs.
Rational direction_support(const WeightedDigraph& g, const Covector& alpha);

/// Existence verdict for sections of class alpha, with a human-readable
/// reason and, for the obstructed case, a negative-cycle witness.
struct ExistenceVerdict {
    bool nonempty = false;
    std::string reason;
    std::vector<std::int32_t> witness_cycle; // negative cycle when that is the reason
    std::int64_t witness_weight = 0;
};
ExistenceVerdict existence(const WeightedDigraph& g, const Covector& alpha);

/// True iff quasi-Lyapunov and the alpha-recurrent set is empty: every cycle
/// has strictly positive alpha-weight, so the extracted section is global.
bool fried_positive(const WeightedDigraph& g, const Covector& alpha);

/// Rational direction fan for support-value sampling: 2D = primitive vectors
/// sorted by angle with max coefficient <= order; 3D = the icosahedral
/// directions in the (0, ±8, ±13) integer approximation plus permutations.
std::vector<Covector> direction_fan(int dim, int order);

} // namespace torsec
