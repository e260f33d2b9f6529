#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "torsec/covector.hpp"
#include "torsec/graph.hpp"

namespace torsec {

/// Minimum cycle mean of integer edge weights: min over directed cycles of
/// (total weight / edge count), as an exact rational. Empty optional iff the
/// graph is acyclic.
///
/// Primary algorithm: Howard policy iteration in doubles to find a candidate
/// cycle, then an exact certify-and-refine loop — the candidate cycle's mean
/// p/q is checked by one integer Bellman-Ford pass over weights q*w - p; if a
/// negative cycle remains, that cycle's (strictly smaller) exact mean becomes
/// the next candidate. Every candidate is an attained cycle mean, so the loop
/// terminates at the true minimum regardless of floating-point behavior.
/// Deterministic.
std::optional<Rational> min_cycle_mean(const WeightedDigraph& g,
                                       const std::vector<std::int64_t>& w);

/// Karp's O(VE) dynamic program, exact; memory O(V^2). Used as an oracle and
/// for small graphs (vertex count capped by the caller's good judgment).
std::optional<Rational> min_cycle_mean_karp(const WeightedDigraph& g,
                                            const std::vector<std::int64_t>& w);

/// Integer negative-cycle test: returns a cycle (vertex sequence, closed
/// implicitly) of negative total weight if one exists, else feasible Bellman
/// potentials d with d(v) <= d(u) + w(u->v) for every edge (virtual source:
/// d <= 0 everywhere). SPFA with early negative detection. Deterministic.
struct BellmanResult {
    bool has_negative_cycle = false;
    std::vector<std::int64_t> dist;          // valid iff !has_negative_cycle
    std::vector<std::int32_t> cycle;         // valid iff has_negative_cycle
    std::int64_t cycle_weight = 0;           // total weight of `cycle`
};
BellmanResult bellman_potentials(const WeightedDigraph& g,
                                 const std::vector<std::int64_t>& w);

/// Single-source shortest path weights over integer weights with no negative
/// cycle reachable (caller guarantees); unreachable = nullopt entries.
std::vector<std::optional<std::int64_t>> shortest_from(const WeightedDigraph& g,
                                                       const std::vector<std::int64_t>& w,
                                                       std::int32_t source);

} // namespace torsec
