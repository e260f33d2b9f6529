#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "torsec/graph.hpp"

namespace torsec {

/// Decomposition of a graph into recurrence chains: the strongly connected
/// components that carry at least one cycle (a singleton SCC is recurrent iff
/// it has a self-loop). Chains are numbered by their smallest contained
/// vertex id; `chain_of[v]` is -1 for non-recurrent vertices.
struct ChainDecomposition {
    std::vector<std::int32_t> chain_of;            // per vertex, -1 if wandering
    std::vector<std::vector<std::int32_t>> chains; // vertex lists, each sorted
    std::vector<std::int32_t> wandering;           // non-recurrent vertices, sorted
    /// Condensation edges between chains (i -> j, deduplicated, sorted):
    /// chain i precedes chain j iff a directed path exists (transitively).
    std::vector<std::pair<std::int32_t, std::int32_t>> order_edges;

    std::int32_t chain_count() const { return static_cast<std::int32_t>(chains.size()); }
};

/// Vertices lying on at least one directed cycle (self-loops included).
std::vector<std::int32_t> recurrent_set(const WeightedDigraph& g);

ChainDecomposition chain_decomposition(const WeightedDigraph& g);

/// True iff every vertex is recurrent and there is exactly one chain.
bool is_chain_recurrent(const WeightedDigraph& g);

/// Discrete Lyapunov function: one integer value per vertex, constant on each
/// chain, strictly decreasing along every edge whose endpoints lie in
/// different strongly connected components, distinct values on distinct
/// chains. Values are reverse topological ranks of the SCC condensation
/// (deterministic: Kahn's algorithm with a min-heap on smallest vertex id).
std::vector<std::int64_t> lyapunov_potential(const WeightedDigraph& g);

/// JSON export (chain id -> vertex list, condensation edge list).
std::string chain_decomposition_json(const ChainDecomposition& cd);

} // namespace torsec
