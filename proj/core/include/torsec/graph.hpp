#pragma once

#include <cstdint>
#include <tuple>
#include <vector>

#include "torsec/covector.hpp"

namespace torsec {

/// One directed edge with its winding weight, used while assembling graphs.
struct EdgeRec {
    std::int32_t u = 0;
    std::int32_t v = 0;
    Winding k{0, 0, 0};

    bool operator<(const EdgeRec& o) const {
        return std::tie(u, v, k) < std::tie(o.u, o.v, o.k);
    }
    bool operator==(const EdgeRec& o) const { return u == o.u && v == o.v && k == o.k; }
};

/// Immutable directed multigraph in CSR form. Every edge carries an integer
/// winding vector; parallel edges with distinct windings are kept. Edges of a
/// vertex are sorted by (target, winding), so iteration order — and therefore
/// every analysis built on top — is deterministic.
struct WeightedDigraph {
    int dim = 2;
    std::vector<std::int64_t> offsets{0}; // size n+1
    std::vector<std::int32_t> heads;      // edge target, size m
    std::vector<Winding> winds;           // edge winding, size m

    std::int64_t vertex_count() const { return static_cast<std::int64_t>(offsets.size()) - 1; }
    std::int64_t edge_count() const { return static_cast<std::int64_t>(heads.size()); }

    /// Builds the CSR from an edge list (sorted + deduplicated internally).
    static WeightedDigraph from_edges(int dim, std::int64_t n, std::vector<EdgeRec> edges);

    /// Per-edge alpha weights: w[e] = alpha(winding[e]).
    std::vector<std::int64_t> alpha_weights(const Covector& alpha) const;

    /// Edge sources, materialized on demand (edge id -> source vertex).
    std::vector<std::int32_t> edge_sources() const;
};

} // namespace torsec
