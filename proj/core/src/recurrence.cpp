#include "torsec/recurrence.hpp"

#include <algorithm>
#include <queue>

#include <json.hpp>

#include "torsec/errors.hpp"

namespace torsec {

namespace {

/// Iterative Tarjan SCC. Returns component id per vertex; components are
/// numbered in reverse topological order of discovery (standard Tarjan
/// property: every edge goes from a component id >= to the target's id...
/// we do not rely on that ordering, only on the partition).
struct SccResult {
    std::vector<std::int32_t> comp; // per vertex
    std::int32_t count = 0;
};

SccResult tarjan_scc(const WeightedDigraph& g) {
    const std::int64_t n = g.vertex_count();
    SccResult r;
    r.comp.assign(n, -1);
    std::vector<std::int32_t> disc(n, -1), low(n, 0);
    std::vector<std::int8_t> on_stack(n, 0);
    std::vector<std::int32_t> stack;
    stack.reserve(64);
    struct Frame {
        std::int32_t v;
        std::int64_t edge; // next out-edge index to examine
    };
    std::vector<Frame> call;
    std::int32_t timer = 0;

    for (std::int64_t root = 0; root < n; ++root) {
        if (disc[root] != -1) continue;
        call.push_back({static_cast<std::int32_t>(root), g.offsets[root]});
        disc[root] = low[root] = timer++;
        stack.push_back(static_cast<std::int32_t>(root));
        on_stack[root] = 1;
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.edge < g.offsets[f.v + 1]) {
                std::int32_t w = g.heads[f.edge++];
                if (disc[w] == -1) {
                    disc[w] = low[w] = timer++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.push_back({w, g.offsets[w]});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], disc[w]);
                }
            } else {
                if (low[f.v] == disc[f.v]) {
                    while (true) {
                        std::int32_t w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        r.comp[w] = r.count;
                        if (w == f.v) break;
                    }
                    ++r.count;
                }
                std::int32_t v = f.v;
                call.pop_back();
                if (!call.empty()) {
                    std::int32_t parent = call.back().v;
                    low[parent] = std::min(low[parent], low[v]);
                }
            }
        }
    }
    return r;
}

} // namespace

ChainDecomposition chain_decomposition(const WeightedDigraph& g) {
    const std::int64_t n = g.vertex_count();
    SccResult scc = tarjan_scc(g);

    // Which components carry a cycle: size >= 2, or a self-loop.
    std::vector<std::int32_t> size(scc.count, 0);
    for (std::int64_t v = 0; v < n; ++v) ++size[scc.comp[v]];
    std::vector<std::int8_t> cyclic(scc.count, 0);
    for (std::int32_t c = 0; c < scc.count; ++c) cyclic[c] = size[c] >= 2;
    for (std::int64_t v = 0; v < n; ++v)
        for (std::int64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e)
            if (g.heads[e] == v) cyclic[scc.comp[v]] = 1;

    // Deterministic chain numbering by smallest contained vertex id.
    std::vector<std::int32_t> smallest(scc.count, -1);
    for (std::int64_t v = 0; v < n; ++v)
        if (smallest[scc.comp[v]] == -1) smallest[scc.comp[v]] = static_cast<std::int32_t>(v);
    std::vector<std::int32_t> cyclic_comps;
    for (std::int32_t c = 0; c < scc.count; ++c)
        if (cyclic[c]) cyclic_comps.push_back(c);
    std::sort(cyclic_comps.begin(), cyclic_comps.end(),
              [&](std::int32_t a, std::int32_t b) { return smallest[a] < smallest[b]; });

    ChainDecomposition cd;
    cd.chain_of.assign(n, -1);
    cd.chains.resize(cyclic_comps.size());
    std::vector<std::int32_t> chain_of_comp(scc.count, -1);
    for (std::size_t i = 0; i < cyclic_comps.size(); ++i)
        chain_of_comp[cyclic_comps[i]] = static_cast<std::int32_t>(i);
    for (std::int64_t v = 0; v < n; ++v) {
        std::int32_t ch = chain_of_comp[scc.comp[v]];
        cd.chain_of[v] = ch;
        if (ch >= 0)
            cd.chains[ch].push_back(static_cast<std::int32_t>(v));
        else
            cd.wandering.push_back(static_cast<std::int32_t>(v));
    }

    // Conley order: chain i precedes chain j iff a directed path exists.
    // BFS over the component condensation from each chain component.
    if (!cyclic_comps.empty()) {
        // condensation adjacency (deduplicated)
        std::vector<std::vector<std::int32_t>> cadj(scc.count);
        for (std::int64_t v = 0; v < n; ++v)
            for (std::int64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
                std::int32_t a = scc.comp[v], b = scc.comp[g.heads[e]];
                if (a != b) cadj[a].push_back(b);
            }
        for (auto& row : cadj) {
            std::sort(row.begin(), row.end());
            row.erase(std::unique(row.begin(), row.end()), row.end());
        }
        std::vector<std::int8_t> seen(scc.count);
        for (std::size_t i = 0; i < cyclic_comps.size(); ++i) {
            std::fill(seen.begin(), seen.end(), 0);
            std::vector<std::int32_t> bfs{cyclic_comps[i]};
            seen[cyclic_comps[i]] = 1;
            for (std::size_t head = 0; head < bfs.size(); ++head)
                for (std::int32_t nb : cadj[bfs[head]])
                    if (!seen[nb]) {
                        seen[nb] = 1;
                        bfs.push_back(nb);
                    }
            for (std::size_t j = 0; j < cyclic_comps.size(); ++j)
                if (j != i && seen[cyclic_comps[j]])
                    cd.order_edges.push_back({static_cast<std::int32_t>(i),
                                              static_cast<std::int32_t>(j)});
        }
        std::sort(cd.order_edges.begin(), cd.order_edges.end());
    }
    return cd;
}

std::vector<std::int32_t> recurrent_set(const WeightedDigraph& g) {
    ChainDecomposition cd = chain_decomposition(g);
    std::vector<std::int32_t> out;
    for (const auto& ch : cd.chains) out.insert(out.end(), ch.begin(), ch.end());
    std::sort(out.begin(), out.end());
    return out;
}

bool is_chain_recurrent(const WeightedDigraph& g) {
    ChainDecomposition cd = chain_decomposition(g);
    return cd.chains.size() == 1 && cd.wandering.empty();
}

std::vector<std::int64_t> lyapunov_potential(const WeightedDigraph& g) {
    const std::int64_t n = g.vertex_count();
    SccResult scc = tarjan_scc(g);

    // Condensation adjacency + indegrees.
    std::vector<std::vector<std::int32_t>> cadj(scc.count);
    std::vector<std::int32_t> indeg(scc.count, 0);
    for (std::int64_t v = 0; v < n; ++v)
        for (std::int64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
            std::int32_t a = scc.comp[v], b = scc.comp[g.heads[e]];
            if (a != b) cadj[a].push_back(b);
        }
    for (auto& row : cadj) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        for (std::int32_t b : row) ++indeg[b];
    }

    // Deterministic Kahn order: min-heap keyed by smallest contained vertex.
    std::vector<std::int32_t> smallest(scc.count, -1);
    for (std::int64_t v = 0; v < n; ++v)
        if (smallest[scc.comp[v]] == -1) smallest[scc.comp[v]] = static_cast<std::int32_t>(v);
    using HeapItem = std::pair<std::int32_t, std::int32_t>; // (smallest vertex, comp)
    std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>> heap;
    for (std::int32_t c = 0; c < scc.count; ++c)
        if (indeg[c] == 0) heap.push({smallest[c], c});
    std::vector<std::int64_t> rank(scc.count, 0);
    std::int64_t pos = 0;
    while (!heap.empty()) {
        auto [sv, c] = heap.top();
        heap.pop();
        rank[c] = pos++;
        for (std::int32_t b : cadj[c])
            if (--indeg[b] == 0) heap.push({smallest[b], b});
    }
    if (pos != scc.count) throw AnalysisError("condensation was not acyclic (internal)");

    std::vector<std::int64_t> val(n);
    for (std::int64_t v = 0; v < n; ++v) val[v] = scc.count - 1 - rank[scc.comp[v]];
    return val;
}

std::string chain_decomposition_json(const ChainDecomposition& cd) {
    nlohmann::ordered_json j;
    j["chain_count"] = cd.chains.size();
    j["chains"] = cd.chains;
    j["wandering_count"] = cd.wandering.size();
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    for (const auto& [a, b] : cd.order_edges) edges.push_back({a, b});
    j["order_edges"] = edges;
    return j.dump();
}

} // namespace torsec
