#pragma once

// Brute-force reference implementations used to validate the library's graph
// analyses on small inputs. Everything here is deliberately naive: correctness
// by construction, no shared code with the algorithms under test.

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "torsec/covector.hpp"
#include "torsec/graph.hpp"
#include "torsec/sections.hpp"

namespace torsec::testing {

/// One simple directed cycle (distinct vertices; closing edge implied), with
/// one entry per choice of parallel edges along the way.
struct BruteCycle {
    std::vector<std::int32_t> verts;
    Winding total{0, 0, 0};
    int length = 0;
};

/// Every simple cycle of the multigraph, including self-loops. Throws when the
/// count explodes (keep inputs at toy size).
std::vector<BruteCycle> brute_simple_cycles(const WeightedDigraph& g);

/// Floyd-Warshall facts about one covector: pairwise minimum alpha-weights
/// (over walks with pairwise-distinct intermediate vertices, which equals
/// shortest paths whenever no negative cycle exists), the no-negative-cycle
/// verdict, the zero-weight-recurrent set, and its chain partition.
struct BruteAlphaFacts {
    static constexpr std::int64_t kUnreach = std::numeric_limits<std::int64_t>::max() / 4;

    bool quasi_lyapunov = true;
    std::vector<std::int32_t> recurrent;           // sorted
    std::vector<std::vector<std::int32_t>> chains; // numbered by smallest vertex
    std::vector<std::vector<std::int64_t>> dist;   // kUnreach when unreachable
};
BruteAlphaFacts brute_alpha_facts(const WeightedDigraph& g, const Covector& alpha);

/// Minimum cycle mean over the explicit simple-cycle list (nullopt: acyclic).
std::optional<Rational> brute_min_cycle_mean(const WeightedDigraph& g, const Covector& alpha);

/// Chain-to-chain minimum path weights from brute facts; SHIFT_INF when
/// unreachable, 0 on the diagonal. Only meaningful when quasi_lyapunov.
std::vector<std::vector<std::int64_t>> brute_shifts(const BruteAlphaFacts& f);

/// Feasible-labeling count by raw box enumeration over the interval bounds
/// label(i) in [-a(0,i), a(i,0)] with every pairwise constraint re-checked.
/// Transitive chain graphs only; -1 when the box exceeds `guard` points.
std::int64_t brute_labeling_count(const AlphaChainGraph& cg, std::int64_t guard = 4000000);

/// Random 2D multigraph: 2..12 vertices, n..3n edge draws, winding components
/// uniform in [-2, 2] (duplicates collapse in CSR construction).
WeightedDigraph random_graph(std::mt19937& rng);

/// Homology class of a closed polyline on the torus: accumulated
/// nearest-image displacement, rounded. Orientation-dependent sign.
std::array<int, 2> polyline_class(const std::vector<std::array<double, 2>>& loop);

} // namespace torsec::testing
