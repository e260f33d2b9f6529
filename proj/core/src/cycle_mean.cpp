#include "torsec/cycle_mean.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "torsec/errors.hpp"

namespace torsec {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

std::int64_t max_abs_weight(const std::vector<std::int64_t>& w) {
    std::int64_t m = 0;
    for (std::int64_t x : w) m = std::max(m, x < 0 ? -x : x);
    return m;
}

// Walks the parent pointers from `start` into the parent-graph cycle that must
// exist (the caller established that start's relaxation chain is longer than
// any simple path) and returns the cycle in forward edge direction.
struct ParentCycle {
    std::vector<std::int32_t> vertices;
    std::int64_t weight = 0;
};

ParentCycle extract_parent_cycle(std::int32_t start, const std::vector<std::int32_t>& parent_vertex,
                                 const std::vector<std::int64_t>& parent_edge,
                                 const std::vector<std::int64_t>& w, std::int64_t n) {
    std::int32_t v = start;
    for (std::int64_t i = 0; i < n; ++i) {
        if (parent_vertex[v] < 0) throw AnalysisError("negative-cycle extraction lost the trail");
        v = parent_vertex[v];
    }
    // v is now inside a parent cycle; walk until the first repeat.
    std::vector<std::int32_t> stamp(parent_vertex.size(), 0);
    std::vector<std::int32_t> walk;
    std::int32_t cur = v;
    while (stamp[cur] == 0) {
        stamp[cur] = static_cast<std::int32_t>(walk.size()) + 1;
        walk.push_back(cur);
        cur = parent_vertex[cur];
    }
    std::size_t first = stamp[cur] - 1;
    ParentCycle pc;
    // walk[first..] traverses the cycle backward (each step goes to the
    // parent); reverse it for forward orientation.
    for (std::size_t i = walk.size(); i-- > first;) pc.vertices.push_back(walk[i]);
    for (std::int32_t u : pc.vertices) pc.weight += w[parent_edge[u]];
    if (pc.weight >= 0)
        throw AnalysisError("negative-cycle extraction produced a non-negative cycle (internal)");
    return pc;
}

} // namespace

BellmanResult bellman_potentials(const WeightedDigraph& g, const std::vector<std::int64_t>& w) {
    const std::int64_t n = g.vertex_count();
    BellmanResult r;
    r.dist.assign(n, 0);
    if (n == 0) return r;
    std::vector<std::int32_t> parent_vertex(n, -1);
    std::vector<std::int64_t> parent_edge(n, -1);
    std::vector<std::uint8_t> inq(n, 1);
    std::deque<std::int32_t> q;
    for (std::int64_t v = 0; v < n; ++v) q.push_back(static_cast<std::int32_t>(v));
    constexpr std::int32_t kSentinel = -1;
    q.push_back(kSentinel);

    const std::int64_t bound = -(n * max_abs_weight(w)) - 1; // below any simple-walk weight
    std::int64_t rounds = 0;

    auto negative_from = [&](std::int32_t trigger) {
        ParentCycle pc = extract_parent_cycle(trigger, parent_vertex, parent_edge, w, n);
        r.has_negative_cycle = true;
        r.cycle = std::move(pc.vertices);
        r.cycle_weight = pc.weight;
        r.dist.clear();
    };

    // A cycle in the parent-pointer graph appears within a few rounds of a
    // negative cycle being relaxed around, long before the distance bound or
    // the round counter trips; scanning for one keeps detection fast on large
    // graphs whose negative cycles have small mean.
    std::vector<std::int32_t> scan_stamp(n, 0);
    auto parent_graph_cycle = [&]() -> bool {
        std::fill(scan_stamp.begin(), scan_stamp.end(), 0);
        std::int32_t walk_id = 0;
        for (std::int64_t s = 0; s < n; ++s) {
            if (scan_stamp[s] != 0) continue;
            ++walk_id;
            std::int32_t cur = static_cast<std::int32_t>(s);
            while (cur >= 0) {
                if (scan_stamp[cur] == walk_id) {
                    // cur lies on a parent cycle; collect it (parents run
                    // backward along edges, so reverse for forward order).
                    std::vector<std::int32_t> cyc;
                    std::int32_t v2 = cur;
                    do {
                        cyc.push_back(v2);
                        v2 = parent_vertex[v2];
                    } while (v2 != cur);
                    std::reverse(cyc.begin(), cyc.end());
                    std::int64_t weight = 0;
                    for (std::int32_t u2 : cyc) weight += w[parent_edge[u2]];
                    if (weight < 0) {
                        r.has_negative_cycle = true;
                        r.cycle = std::move(cyc);
                        r.cycle_weight = weight;
                        r.dist.clear();
                        return true;
                    }
                    break;
                }
                if (scan_stamp[cur] != 0) break;
                scan_stamp[cur] = walk_id;
                cur = parent_vertex[cur];
            }
        }
        return false;
    };

    while (!q.empty()) {
        std::int32_t v = q.front();
        q.pop_front();
        if (v == kSentinel) {
            if (q.empty()) break;
            if (parent_graph_cycle()) return r;
            if (++rounds > n + 1) {
                negative_from(q.front());
                return r;
            }
            q.push_back(kSentinel);
            continue;
        }
        inq[v] = 0;
        std::int64_t dv = r.dist[v];
        for (std::int64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
            std::int32_t u = g.heads[e];
            std::int64_t nd = dv + w[e];
            if (nd < r.dist[u]) {
                r.dist[u] = nd;
                parent_vertex[u] = v;
                parent_edge[u] = e;
                if (nd <= bound) {
                    negative_from(u);
                    return r;
                }
                if (!inq[u]) {
                    inq[u] = 1;
                    q.push_back(u);
                }
            }
        }
    }
    return r;
}

std::vector<std::optional<std::int64_t>> shortest_from(const WeightedDigraph& g,
                                                       const std::vector<std::int64_t>& w,
                                                       std::int32_t source) {
    const std::int64_t n = g.vertex_count();
    std::vector<std::int64_t> dist(n, kInf);
    std::vector<std::uint8_t> inq(n, 0);
    std::deque<std::int32_t> q;
    dist[source] = 0;
    q.push_back(source);
    inq[source] = 1;
    constexpr std::int32_t kSentinel = -1;
    q.push_back(kSentinel);
    std::int64_t rounds = 0;
    while (!q.empty()) {
        std::int32_t v = q.front();
        q.pop_front();
        if (v == kSentinel) {
            if (q.empty()) break;
            if (++rounds > n + 1)
                throw AnalysisError("shortest_from: negative cycle (precondition violated)");
            q.push_back(kSentinel);
            continue;
        }
        inq[v] = 0;
        std::int64_t dv = dist[v];
        for (std::int64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
            std::int32_t u = g.heads[e];
            std::int64_t nd = dv + w[e];
            if (nd < dist[u]) {
                dist[u] = nd;
                if (!inq[u]) {
                    inq[u] = 1;
                    q.push_back(u);
                }
            }
        }
    }
    std::vector<std::optional<std::int64_t>> out(n);
    for (std::int64_t v = 0; v < n; ++v)
        if (dist[v] < kInf) out[v] = dist[v];
    return out;
}

std::optional<Rational> min_cycle_mean_karp(const WeightedDigraph& g,
                                            const std::vector<std::int64_t>& w) {
    const std::int64_t n = g.vertex_count();
    if (n == 0) return std::nullopt;
    if (n > 4096) throw AnalysisError("min_cycle_mean_karp is limited to small graphs");
    // Super-source formulation: D[k][v] = min weight of a k-edge walk from the
    // virtual source (0-weight edges to every vertex); N = n + 1 levels.
    const std::int64_t N = n + 1;
    std::vector<std::vector<std::int64_t>> D(N + 1, std::vector<std::int64_t>(n, kInf));
    for (std::int64_t v = 0; v < n; ++v) D[1][v] = 0;
    for (std::int64_t k = 2; k <= N; ++k) {
        auto& prev = D[k - 1];
        auto& cur = D[k];
        for (std::int64_t v = 0; v < n; ++v) {
            if (prev[v] >= kInf) continue;
            std::int64_t dv = prev[v];
            for (std::int64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
                std::int32_t u = g.heads[e];
                if (dv + w[e] < cur[u]) cur[u] = dv + w[e];
            }
        }
    }
    std::optional<Rational> best;
    for (std::int64_t v = 0; v < n; ++v) {
        if (D[N][v] >= kInf) continue;
        std::optional<Rational> worst; // max over k of (D[N][v]-D[k][v])/(N-k)
        for (std::int64_t k = 1; k < N; ++k) {
            if (D[k][v] >= kInf) continue;
            Rational r = Rational::of(D[N][v] - D[k][v], N - k);
            if (!worst || *worst < r) worst = r;
        }
        if (worst && (!best || *worst < *best)) best = worst;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Howard policy iteration with exact certification.

namespace {

struct HowardOut {
    bool converged = false;
    std::int64_t best_num = 0; // best policy-cycle weight
    std::int64_t best_den = 1; // and its length
    std::vector<std::int32_t> best_cycle;
};

HowardOut howard_candidate(const WeightedDigraph& g, const std::vector<std::int64_t>& w,
                           const std::vector<std::uint8_t>& keep) {
    const std::int64_t n = g.vertex_count();
    std::vector<std::int64_t> pi(n, -1); // chosen edge per kept vertex
    for (std::int64_t v = 0; v < n; ++v) {
        if (!keep[v]) continue;
        for (std::int64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
            if (!keep[g.heads[e]]) continue;
            if (pi[v] < 0 || w[e] < w[pi[v]]) pi[v] = e;
        }
        if (pi[v] < 0) throw AnalysisError("howard: kept vertex lost its out-edges (internal)");
    }

    std::vector<double> mu(n, 0.0), d(n, 0.0);
    std::vector<std::int32_t> comp(n, -1);
    std::vector<std::int8_t> on_cycle(n, 0);
    std::vector<std::int32_t> order; // walk scratch
    const double tol = 1e-9;

    HowardOut out;
    int max_iter = 256;
    for (int iter = 0; iter < max_iter; ++iter) {
        // --- policy evaluation: cycles of the functional graph pi ---
        std::fill(comp.begin(), comp.end(), -1);
        std::fill(on_cycle.begin(), on_cycle.end(), 0);
        std::vector<std::pair<std::int64_t, std::int64_t>> comp_mean; // (sum, len)
        std::vector<std::int32_t> comp_root;
        std::vector<std::int32_t> state(n, 0); // 0 unvisited, 1 in progress, 2 done
        for (std::int64_t s = 0; s < n; ++s) {
            if (!keep[s] || state[s] != 0) continue;
            order.clear();
            std::int32_t v = static_cast<std::int32_t>(s);
            while (keep[v] && state[v] == 0) {
                state[v] = 1;
                order.push_back(v);
                v = g.heads[pi[v]];
            }
            std::int32_t cid;
            if (state[v] == 1) {
                // new cycle discovered: v is on it
                cid = static_cast<std::int32_t>(comp_mean.size());
                std::int64_t sum = 0, len = 0;
                std::int32_t c = v;
                do {
                    on_cycle[c] = 1;
                    comp[c] = cid;
                    sum += w[pi[c]];
                    ++len;
                    c = g.heads[pi[c]];
                } while (c != v);
                comp_mean.push_back({sum, len});
                comp_root.push_back(v);
            } else {
                cid = comp[v];
            }
            for (std::int32_t u : order) {
                state[u] = 2;
                if (comp[u] < 0) comp[u] = cid;
            }
        }
        // cycle values: d around each cycle from its root
        for (std::size_t c = 0; c < comp_root.size(); ++c) {
            double m = static_cast<double>(comp_mean[c].first) / comp_mean[c].second;
            std::int32_t r = comp_root[c];
            std::int32_t v = r;
            double acc = 0.0;
            do {
                d[v] = acc;
                mu[v] = m;
                acc += w[pi[v]] - m;
                v = g.heads[pi[v]];
            } while (v != r);
        }
        // tree values: propagate backward over reversed policy edges (BFS
        // from cycle vertices). Build reverse lists once per iteration.
        {
            std::vector<std::vector<std::int32_t>> rev(n);
            for (std::int64_t v2 = 0; v2 < n; ++v2)
                if (keep[v2] && !on_cycle[v2]) rev[g.heads[pi[v2]]].push_back(static_cast<std::int32_t>(v2));
            std::vector<std::int32_t> bfs;
            for (std::int64_t v2 = 0; v2 < n; ++v2)
                if (keep[v2] && on_cycle[v2]) bfs.push_back(static_cast<std::int32_t>(v2));
            for (std::size_t h = 0; h < bfs.size(); ++h) {
                std::int32_t v2 = bfs[h];
                for (std::int32_t u : rev[v2]) {
                    mu[u] = mu[v2];
                    d[u] = w[pi[u]] - mu[v2] + d[v2];
                    comp[u] = comp[v2];
                    bfs.push_back(u);
                }
            }
        }
        // --- policy improvement ---
        bool changed_mu = false;
        for (std::int64_t v2 = 0; v2 < n; ++v2) {
            if (!keep[v2]) continue;
            for (std::int64_t e = g.offsets[v2]; e < g.offsets[v2 + 1]; ++e) {
                std::int32_t u = g.heads[e];
                if (!keep[u]) continue;
                if (mu[u] < mu[v2] - tol) {
                    pi[v2] = e;
                    mu[v2] = mu[u]; // provisional; re-evaluated next round
                    changed_mu = true;
                }
            }
        }
        if (!changed_mu) {
            bool changed_d = false;
            for (std::int64_t v2 = 0; v2 < n; ++v2) {
                if (!keep[v2]) continue;
                for (std::int64_t e = g.offsets[v2]; e < g.offsets[v2 + 1]; ++e) {
                    std::int32_t u = g.heads[e];
                    if (!keep[u] || std::abs(mu[u] - mu[v2]) > tol) continue;
                    double cand = w[e] - mu[v2] + d[u];
                    if (cand < d[v2] - tol) {
                        pi[v2] = e;
                        d[v2] = cand;
                        changed_d = true;
                    }
                }
            }
            if (!changed_d) {
                out.converged = true;
                // best policy cycle, exact arithmetic
                bool have = false;
                for (std::size_t c = 0; c < comp_root.size(); ++c) {
                    auto [sum, len] = comp_mean[c];
                    if (!have || sum * out.best_den < out.best_num * len) {
                        out.best_num = sum;
                        out.best_den = len;
                        have = true;
                        out.best_cycle.clear();
                        std::int32_t r = comp_root[c], v3 = r;
                        do {
                            out.best_cycle.push_back(v3);
                            v3 = g.heads[pi[v3]];
                        } while (v3 != r);
                    }
                }
                return out;
            }
        }
    }
    return out; // not converged; caller falls back
}

} // namespace

std::optional<Rational> min_cycle_mean(const WeightedDigraph& g,
                                       const std::vector<std::int64_t>& w) {
    const std::int64_t n = g.vertex_count();
    if (n == 0) return std::nullopt;

    // Restrict to vertices from which a cycle is reachable: iteratively strip
    // vertices whose remaining out-degree is zero (they cannot lie on or lead
    // back into any cycle... only cycles matter here).
    std::vector<std::int64_t> outdeg(n, 0);
    std::vector<std::vector<std::int32_t>> rev(n);
    auto src = g.edge_sources();
    for (std::int64_t e = 0; e < g.edge_count(); ++e) {
        ++outdeg[src[e]];
        rev[g.heads[e]].push_back(src[e]);
    }
    std::vector<std::int32_t> dead;
    std::vector<std::uint8_t> keep(n, 1);
    for (std::int64_t v = 0; v < n; ++v)
        if (outdeg[v] == 0) {
            keep[v] = 0;
            dead.push_back(static_cast<std::int32_t>(v));
        }
    for (std::size_t h = 0; h < dead.size(); ++h)
        for (std::int32_t u : rev[dead[h]])
            if (keep[u] && --outdeg[u] == 0) {
                keep[u] = 0;
                dead.push_back(u);
            }
    bool any = false;
    for (std::int64_t v = 0; v < n; ++v) any = any || keep[v];
    if (!any) return std::nullopt; // acyclic

    // Seed candidate: the exact mean of some actual cycle. Howard's best policy
    // cycle when it converged, otherwise a cycle of the min-weight policy.
    HowardOut hc = howard_candidate(g, w, keep);
    std::int64_t num, den;
    if (hc.converged) {
        num = hc.best_num;
        den = hc.best_den;
    } else {
        std::vector<std::int64_t> pi(n, -1);
        for (std::int64_t v = 0; v < n; ++v) {
            if (!keep[v]) continue;
            for (std::int64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
                if (!keep[g.heads[e]]) continue;
                if (pi[v] < 0 || w[e] < w[pi[v]]) pi[v] = e;
            }
        }
        std::int32_t s = 0;
        while (!keep[s]) ++s;
        std::vector<std::int64_t> stamp(n, -1);
        std::int32_t v = s;
        std::int64_t step = 0;
        while (stamp[v] < 0) {
            stamp[v] = step++;
            v = g.heads[pi[v]];
        }
        num = 0;
        den = 0;
        std::int32_t u = v;
        do {
            num += w[pi[u]];
            ++den;
            u = g.heads[pi[u]];
        } while (u != v);
    }

    // Certify the candidate exactly; when certification finds a cycle of mean
    // strictly below the candidate, adopt that cycle's exact mean and retry.
    // The candidate is always an attained cycle mean and strictly decreases,
    // so the loop terminates with the true minimum.
    std::vector<std::int64_t> wq(w.size());
    for (int round = 0; round < 100000; ++round) {
        const std::int64_t d = std::gcd(num < 0 ? -num : num, den);
        if (d > 1) {
            num /= d;
            den /= d;
        }
        for (std::size_t e = 0; e < w.size(); ++e) wq[e] = den * w[e] - num;
        BellmanResult br = bellman_potentials(g, wq);
        if (!br.has_negative_cycle) return Rational::of(num, den);
        std::int64_t sum = 0;
        const auto len = static_cast<std::int64_t>(br.cycle.size());
        for (std::int64_t i = 0; i < len; ++i) {
            const std::int32_t u = br.cycle[i];
            const std::int32_t v = br.cycle[(i + 1) % len];
            std::int64_t best = 0;
            bool found = false;
            for (std::int64_t e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
                if (g.heads[e] != v) continue;
                if (!found || w[e] < best) best = w[e];
                found = true;
            }
            if (!found)
                throw AnalysisError("minimum cycle mean certification cycle is broken (internal)");
            sum += best;
        }
        if (sum * den >= num * len)
            throw AnalysisError("minimum cycle mean failed to improve (internal)");
        num = sum;
        den = len;
    }
    throw AnalysisError("minimum cycle mean failed to certify (internal)");
}

} // namespace torsec
