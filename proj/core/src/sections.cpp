#include "torsec/sections.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>

#include "torsec/errors.hpp"

namespace torsec {

namespace {

constexpr std::int64_t kInf = AlphaChainGraph::SHIFT_INF;

// Single-source shortest alpha-weight paths with parent tracking (for witness
// paths). Precondition: no negative cycle (checked upstream).
struct SourcedPaths {
    std::vector<std::int64_t> dist; // kInf = unreachable
    std::vector<std::int64_t> parent_edge;
    std::vector<std::int32_t> parent_vertex;
};

SourcedPaths sourced_shortest(const WeightedDigraph& g, const std::vector<std::int64_t>& w,
                              std::int32_t source) {
    const std::int64_t n = g.vertex_count();
    SourcedPaths sp;
    sp.dist.assign(n, kInf);
    sp.parent_edge.assign(n, -1);
    sp.parent_vertex.assign(n, -1);
    sp.dist[source] = 0;
    std::deque<std::int32_t> q{source};
    std::vector<std::uint8_t> inq(n, 0);
    inq[source] = 1;
    std::int64_t pulls = 0;
    const std::int64_t cap = (n + 2) * std::max<std::int64_t>(n, 1) * 4 + 64;
    while (!q.empty()) {
        if (++pulls > cap + static_cast<std::int64_t>(g.edge_count()) * (n + 2))
            throw AnalysisError("shortest-path search did not converge (internal)");
        std::int32_t v = q.front();
        q.pop_front();
        inq[v] = 0;
        for (std::int64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
            std::int32_t u = g.heads[e];
            std::int64_t nd = sp.dist[v] + w[e];
            if (nd < sp.dist[u]) {
                sp.dist[u] = nd;
                sp.parent_edge[u] = e;
                sp.parent_vertex[u] = v;
                if (!inq[u]) {
                    inq[u] = 1;
                    q.push_back(u);
                }
            }
        }
    }
    return sp;
}

std::vector<std::int32_t> walk_parents(const SourcedPaths& sp, std::int32_t source,
                                       std::int32_t target) {
    std::vector<std::int32_t> path{target};
    std::int32_t v = target;
    while (v != source) {
        v = sp.parent_vertex[v];
        if (v < 0) throw AnalysisError("witness path reconstruction failed (internal)");
        path.push_back(v);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

std::string format_path(const std::vector<std::int32_t>& path) {
    std::ostringstream os;
    const std::size_t limit = 12;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (path.size() > limit && i == limit / 2) {
            os << "... -> ";
            i = path.size() - limit / 2;
        }
        os << path[i];
        if (i + 1 < path.size()) os << " -> ";
    }
    return os.str();
}

} // namespace

bool AlphaChainGraph::transitive() const {
    const std::int32_t c = chain_count();
    for (std::int32_t i = 0; i < c; ++i)
        for (std::int32_t j = 0; j < c; ++j) {
            if (i == j) continue;
            if (!reachable[i][j] || divergent[i][j] || shifts[i][j] == SHIFT_INF) return false;
        }
    return true;
}

AlphaChainGraph build_chain_graph(const WeightedDigraph& g, const Covector& alpha) {
    AlphaAnalysis a = analyze_alpha(g, alpha);
    if (!a.quasi_lyapunov_neg) {
        std::ostringstream os;
        os << "chain graph undefined for alpha=" << alpha.to_string()
           << ": a cycle of negative alpha-weight " << a.witness_weight << " exists";
        throw AnalysisError(os.str());
    }
    AlphaChainGraph cg;
    cg.alpha = alpha;
    cg.n_alpha = alpha.divisibility();
    cg.levels = 1;
    cg.chains = std::move(a.chains);
    const std::int32_t c = cg.chain_count();
    cg.representatives.resize(c);
    for (std::int32_t i = 0; i < c; ++i) cg.representatives[i] = cg.chains[i][0];
    cg.shifts.assign(c, std::vector<std::int64_t>(c, kInf));
    cg.reachable.assign(c, std::vector<std::uint8_t>(c, 0));
    cg.divergent.assign(c, std::vector<std::uint8_t>(c, 0));
    const auto w = g.alpha_weights(alpha);
    for (std::int32_t i = 0; i < c; ++i) {
        auto dist = shortest_from(g, w, cg.representatives[i]);
        for (std::int32_t j = 0; j < c; ++j) {
            if (i == j) {
                cg.shifts[i][j] = 0;
                cg.reachable[i][j] = 1;
                continue;
            }
            if (dist[cg.representatives[j]]) {
                cg.shifts[i][j] = *dist[cg.representatives[j]];
                cg.reachable[i][j] = 1;
            }
        }
    }
    cg.level_shifts.push_back(cg.shifts);
    return cg;
}

AlphaChainGraph build_chain_graph(const TransitionGraph& tg, const Covector& alpha,
                                  int refinement_levels) {
    if (refinement_levels < 1) throw ConfigError("refinement_levels must be >= 1");
    AlphaChainGraph cg = build_chain_graph(tg.g, alpha);
    cg.levels = refinement_levels;
    if (refinement_levels == 1 || cg.chain_count() == 0) return cg;

    const std::int32_t c = cg.chain_count();
    // base chain id per base cell
    std::vector<std::int32_t> base_chain_of(tg.grid.cell_count(), -1);
    for (std::int32_t i = 0; i < c; ++i)
        for (std::int32_t cell : cg.chains[i]) base_chain_of[cell] = i;

    TransitionGraph cur = tg;
    for (int level = 1; level < refinement_levels; ++level) {
        cur = refine(cur, 2);
        AlphaChainGraph fine = build_chain_graph(cur.g, alpha);
        const std::int32_t fc = fine.chain_count();
        const std::int32_t scale = 1 << level;
        std::vector<std::int32_t> match(fc, -1);
        std::vector<std::int32_t> hit(c, 0);
        for (std::int32_t k = 0; k < fc; ++k) {
            std::vector<std::int64_t> overlap(c, 0);
            for (std::int32_t cell : fine.chains[k]) {
                auto xyz = cur.grid.coords(cell);
                std::int64_t base =
                    tg.grid.index({xyz[0] / scale, xyz[1] / scale, xyz[2] / scale});
                std::int32_t b = base_chain_of[base];
                if (b >= 0) ++overlap[b];
            }
            std::int32_t best = -1;
            bool tie = false;
            for (std::int32_t b = 0; b < c; ++b) {
                if (overlap[b] == 0) continue;
                if (best < 0 || overlap[b] > overlap[best]) {
                    best = b;
                    tie = false;
                } else if (overlap[b] == overlap[best]) {
                    tie = true;
                }
            }
            if (best < 0)
                throw AnalysisError("chain matching failed: a refined chain has no spatial "
                                    "overlap with any base chain");
            if (tie)
                throw AnalysisError("chain matching ambiguous: equal spatial overlap with "
                                    "two base chains");
            if (match[k] >= 0 || hit[best])
                throw AnalysisError("chain matching ambiguous: two refined chains cover the "
                                    "same base chain");
            match[k] = best;
            hit[best] = 1;
        }
        for (std::int32_t b = 0; b < c; ++b)
            if (!hit[b])
                throw AnalysisError("chain matching failed: a base chain has no refined "
                                    "counterpart");
        // permute fine shifts into base indexing
        std::vector<std::vector<std::int64_t>> lvl(c, std::vector<std::int64_t>(c, kInf));
        for (std::int32_t i = 0; i < fc; ++i)
            for (std::int32_t j = 0; j < fc; ++j) lvl[match[i]][match[j]] = fine.shifts[i][j];
        cg.level_shifts.push_back(std::move(lvl));
    }
    // divergent = strictly increasing at every level step (kInf acts as +inf)
    for (std::int32_t i = 0; i < c; ++i)
        for (std::int32_t j = 0; j < c; ++j) {
            if (i == j) continue;
            bool inc = true;
            for (std::size_t l = 0; l + 1 < cg.level_shifts.size(); ++l) {
                std::int64_t a = cg.level_shifts[l][i][j], b = cg.level_shifts[l + 1][i][j];
                bool strict = (a == kInf) ? false : (b == kInf ? true : b > a);
                if (!strict) {
                    inc = false;
                    break;
                }
            }
            cg.divergent[i][j] = inc ? 1 : 0;
        }
    return cg;
}

bool labeling_feasible(const AlphaChainGraph& cg, const Labeling& l, std::string* why) {
    const std::int32_t c = cg.chain_count();
    if (static_cast<std::int32_t>(l.labels.size()) != c)
        throw AnalysisError("labeling has a different number of labels than chains");
    for (std::int32_t i = 0; i < c; ++i)
        for (std::int32_t j = 0; j < c; ++j) {
            if (i == j || !cg.reachable[i][j] || cg.divergent[i][j]) continue;
            if (cg.shifts[i][j] == kInf) continue;
            if (l.labels[i] - l.labels[j] > cg.shifts[i][j]) {
                if (why) {
                    std::ostringstream os;
                    os << "label(" << i << ") - label(" << j << ") = "
                       << (l.labels[i] - l.labels[j]) << " exceeds shift a[" << i << "][" << j
                       << "] = " << cg.shifts[i][j];
                    *why = os.str();
                }
                return false;
            }
        }
    return true;
}

namespace {

// Family sizes grow as a product over chains; past this point the list is cut
// off and the result is flagged truncated rather than exhausting memory.
constexpr std::size_t kEnumerationCap = 50000;

bool enumerate_rec(const AlphaChainGraph& cg, std::vector<std::int64_t>& cur, std::int32_t i,
                   const std::vector<std::int64_t>& lo, const std::vector<std::int64_t>& hi,
                   std::vector<Labeling>& out) {
    const std::int32_t c = cg.chain_count();
    if (i == c) {
        if (out.size() >= kEnumerationCap) return false;
        out.push_back(Labeling{cg.alpha, cur});
        return true;
    }
    for (std::int64_t v = lo[i]; v <= hi[i]; ++v) {
        bool ok = true;
        for (std::int32_t j = 0; j < i && ok; ++j) {
            if (cg.reachable[i][j] && !cg.divergent[i][j] && cg.shifts[i][j] != kInf &&
                v - cur[j] > cg.shifts[i][j])
                ok = false;
            if (ok && cg.reachable[j][i] && !cg.divergent[j][i] && cg.shifts[j][i] != kInf &&
                cur[j] - v > cg.shifts[j][i])
                ok = false;
        }
        if (!ok) continue;
        cur[i] = v;
        if (!enumerate_rec(cg, cur, i + 1, lo, hi, out)) return false;
    }
    return true;
}

} // namespace

LabelingList enumerate_labelings(const AlphaChainGraph& cg, std::optional<std::int64_t> window) {
    if (cg.n_alpha == 0)
        throw AnalysisError("labeling enumeration is undefined for the zero class");
    LabelingList out;
    const std::int32_t c = cg.chain_count();
    if (c == 0) {
        out.items.push_back(Labeling{cg.alpha, {}});
        return out;
    }
    const bool trans = cg.transitive();
    if (!trans && !window)
        throw AnalysisError("window required: the chain graph is not transitive, the family "
                            "of labelings is infinite");
    std::vector<std::int64_t> lo(c, 0), hi(c, 0);
    for (std::int32_t i = 1; i < c; ++i) {
        if (trans) {
            lo[i] = -cg.shifts[0][i];
            hi[i] = cg.shifts[i][0];
        } else {
            lo[i] = -*window;
            hi[i] = *window;
            if (cg.reachable[0][i] && !cg.divergent[0][i] && cg.shifts[0][i] != kInf)
                lo[i] = std::max(lo[i], -cg.shifts[0][i]);
            if (cg.reachable[i][0] && !cg.divergent[i][0] && cg.shifts[i][0] != kInf)
                hi[i] = std::min(hi[i], cg.shifts[i][0]);
        }
        if (lo[i] > hi[i]) { // no feasible labeling in range
            out.truncated = !trans;
            return out;
        }
    }
    std::vector<std::int64_t> cur(c, 0);
    const bool complete = enumerate_rec(cg, cur, 1, lo, hi, out.items);
    if (trans && window) {
        std::size_t before = out.items.size();
        std::erase_if(out.items, [&](const Labeling& l) {
            for (std::int64_t v : l.labels)
                if (v < -*window || v > *window) return true;
            return false;
        });
        out.truncated = !complete || out.items.size() < before;
    } else if (!trans) {
        out.truncated = true;
    } else {
        out.truncated = !complete;
    }
    return out;
}

Cardinality classify_cardinality(const AlphaChainGraph& cg, const Covector& alpha,
                                 bool chain_recurrent) {
    Cardinality r;
    if (alpha.is_zero()) {
        if (chain_recurrent)
            throw AnalysisError("cardinality undefined: the flow is chain-recurrent, no "
                                "section of the zero class exists");
        r.kind = CardinalityKind::countably_infinite;
        r.reason = "zero class on a non-chain-recurrent flow: integer translates of a "
                   "null-class section are pairwise non-isotopic";
        return r;
    }
    const std::int32_t c = cg.chain_count();
    if (c <= 1) {
        r.kind = CardinalityKind::singleton;
        r.count = 1;
        r.reason = c == 0 ? "no alpha-recurrence chains: one global-section class"
                          : "a single alpha-recurrence chain: the normalization pins the label";
        return r;
    }
    if (cg.transitive()) {
        LabelingList all = enumerate_labelings(cg);
        if (all.truncated) {
            r.kind = CardinalityKind::finite;
            r.count = -1; // finite but beyond the enumeration cap
            r.reason = "transitive chain graph: the family is finite but larger than the "
                       "enumeration cap";
            return r;
        }
        r.kind = CardinalityKind::finite;
        r.count = static_cast<std::int64_t>(all.items.size());
        r.reason = "transitive chain graph: labels confined to the shift intervals";
        return r;
    }
    r.kind = CardinalityKind::countably_infinite;
    for (std::int32_t i = 0; i < c; ++i)
        for (std::int32_t j = 0; j < c; ++j) {
            if (i == j) continue;
            if (cg.divergent[i][j]) {
                std::ostringstream os;
                os << "divergent shift a[" << i << "][" << j
                   << "]: the lifted order admits unbounded label separation";
                r.reason = os.str();
                return r;
            }
        }
    for (std::int32_t i = 0; i < c; ++i)
        for (std::int32_t j = 0; j < c; ++j) {
            if (i == j) continue;
            if (!cg.reachable[i][j]) {
                std::ostringstream os;
                os << "chains " << i << " and " << j
                   << " are order-incomparable: their label difference is unconstrained";
                r.reason = os.str();
                return r;
            }
        }
    r.reason = "non-transitive chain graph";
    return r;
}

PotentialField synthesize_potential(const WeightedDigraph& g, const Covector& alpha,
                                    const Labeling& labeling) {
    AlphaAnalysis a = analyze_alpha(g, alpha);
    if (!a.quasi_lyapunov_neg) {
        std::ostringstream os;
        os << "no potential for alpha=" << alpha.to_string()
           << ": a cycle of negative alpha-weight " << a.witness_weight << " exists";
        throw AnalysisError(os.str());
    }
    const std::int64_t n = g.vertex_count();
    const std::int32_t c = static_cast<std::int32_t>(a.chains.size());
    if (static_cast<std::int32_t>(labeling.labels.size()) != c)
        throw AnalysisError("labeling has a different number of labels than chains");
    const auto w = g.alpha_weights(alpha);

    // Feasibility pre-check against the pairwise shifts, with a witness path.
    std::vector<std::int32_t> reps(c);
    for (std::int32_t i = 0; i < c; ++i) reps[i] = a.chains[i][0];
    for (std::int32_t i = 0; i < c; ++i) {
        auto dist = shortest_from(g, w, reps[i]);
        for (std::int32_t j = 0; j < c; ++j) {
            if (i == j || !dist[reps[j]]) continue;
            std::int64_t aij = *dist[reps[j]];
            if (labeling.labels[i] - labeling.labels[j] > aij) {
                SourcedPaths sp = sourced_shortest(g, w, reps[i]);
                auto path = walk_parents(sp, reps[i], reps[j]);
                std::ostringstream os;
                os << "infeasible labeling: label(" << i << ") - label(" << j << ") = "
                   << (labeling.labels[i] - labeling.labels[j]) << " exceeds the shift " << aij
                   << " carried by the path " << format_path(path);
                throw AnalysisError(os.str());
            }
        }
    }

    // Anchors: the labels on chain cells, offset within each chain by the
    // Bellman potential differences (tight connectivity makes them exact).
    std::vector<std::int64_t> anchor(n, kInf);
    for (std::int32_t i = 0; i < c; ++i)
        for (std::int32_t v : a.chains[i])
            anchor[v] = labeling.labels[i] + a.potentials[v] - a.potentials[reps[i]];

    // p(u) = min over anchored x reachable from u of anchor(x) + dist(u -> x):
    // multi-source relaxation on the reverse graph seeded with the anchors.
    std::vector<std::int64_t> roff(n + 1, 0), rhead(g.edge_count()), rw(g.edge_count());
    {
        const auto src = g.edge_sources();
        for (std::int64_t e = 0; e < g.edge_count(); ++e) ++roff[g.heads[e] + 1];
        for (std::int64_t v = 0; v < n; ++v) roff[v + 1] += roff[v];
        std::vector<std::int64_t> fill(roff.begin(), roff.end() - 1);
        for (std::int64_t e = 0; e < g.edge_count(); ++e) {
            std::int64_t slot = fill[g.heads[e]]++;
            rhead[slot] = src[e];
            rw[slot] = w[e];
        }
    }
    std::vector<std::int64_t> p(n, kInf);
    {
        std::deque<std::int32_t> q;
        std::vector<std::uint8_t> inq(n, 0);
        for (std::int64_t v = 0; v < n; ++v)
            if (anchor[v] != kInf) {
                p[v] = anchor[v];
                q.push_back(static_cast<std::int32_t>(v));
                inq[v] = 1;
            }
        while (!q.empty()) {
            std::int32_t v = q.front();
            q.pop_front();
            inq[v] = 0;
            for (std::int64_t e = roff[v]; e < roff[v + 1]; ++e) {
                std::int32_t u = static_cast<std::int32_t>(rhead[e]);
                std::int64_t nd = p[v] + rw[e];
                if (nd < p[u]) {
                    p[u] = nd;
                    if (!inq[u]) {
                        inq[u] = 1;
                        q.push_back(u);
                    }
                }
            }
        }
    }
    // Vertices that reach no chain: ride the Bellman potential, shifted above
    // every anchored value so cross-regime edges stay feasible.
    std::int64_t pmax = 0;
    bool any_reached = false;
    for (std::int64_t v = 0; v < n; ++v)
        if (p[v] != kInf) {
            pmax = any_reached ? std::max(pmax, p[v]) : p[v];
            any_reached = true;
        }
    const std::int64_t c0 = any_reached ? pmax + 1 : 0;
    for (std::int64_t v = 0; v < n; ++v)
        if (p[v] == kInf) p[v] = c0 + a.potentials[v];

    // Audit: every edge satisfies the orientation inequality, every chain cell
    // sits exactly on its anchor.
    {
        const auto src = g.edge_sources();
        for (std::int64_t e = 0; e < g.edge_count(); ++e)
            if (p[g.heads[e]] - p[src[e]] + w[e] < 0)
                throw AnalysisError("synthesized potential violates an edge constraint "
                                    "(internal)");
    }
    for (std::int64_t v = 0; v < n; ++v)
        if (anchor[v] != kInf && p[v] != anchor[v])
            throw AnalysisError("synthesized potential moved off a chain anchor (internal)");

    PotentialField pf;
    pf.alpha = alpha;
    pf.source = labeling;
    pf.p = std::move(p);
    return pf;
}

double default_level(const PotentialField& pf, const AlphaChainGraph& cg) {
    const std::int32_t c = cg.chain_count();
    if (c == 0) return 0.5;
    const auto& labels = pf.source.labels;
    auto defrac = [](double t) { return t - std::floor(t) == 0.0 ? t + 0.5 : t; };
    if (cg.n_alpha == 0) {
        std::vector<std::int64_t> vals(labels);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        if (vals.size() == 1) return static_cast<double>(vals[0]) + 0.5;
        std::size_t best = 0;
        for (std::size_t i = 0; i + 1 < vals.size(); ++i)
            if (vals[i + 1] - vals[i] > vals[best + 1] - vals[best]) best = i;
        return defrac((vals[best] + vals[best + 1]) / 2.0);
    }
    const std::int64_t n = cg.n_alpha;
    std::vector<std::int64_t> res;
    for (std::int64_t l : labels) res.push_back(((l % n) + n) % n);
    std::sort(res.begin(), res.end());
    res.erase(std::unique(res.begin(), res.end()), res.end());
    // circular gaps in [0, n)
    std::size_t best = 0;
    std::int64_t best_len = -1;
    for (std::size_t i = 0; i < res.size(); ++i) {
        std::int64_t next = (i + 1 < res.size()) ? res[i + 1] : res[0] + n;
        if (next - res[i] > best_len) {
            best_len = next - res[i];
            best = i;
        }
    }
    return defrac(res[best] + best_len / 2.0);
}

CrossSection extract_section(const WeightedDigraph& g, const PotentialField& pf, double t) {
    if (!std::isfinite(t)) throw ConfigError("level t must be finite");
    if (t - std::floor(t) == 0.0)
        throw AnalysisError("level t hits a chain label value: integer levels are anchored "
                            "to the recurrence chains");
    CrossSection s;
    s.alpha = pf.alpha;
    s.level = t;
    s.source = pf.source;
    const auto w = g.alpha_weights(pf.alpha);
    const auto src = g.edge_sources();
    const bool zero_class = pf.alpha.is_zero();
    const std::int64_t tfloor = static_cast<std::int64_t>(std::floor(t));
    for (std::int64_t e = 0; e < g.edge_count(); ++e) {
        std::int64_t d = pf.p[g.heads[e]] - pf.p[src[e]] + w[e];
        if (d < 0)
            throw AnalysisError("negative crossing: the supplied potential is infeasible");
        std::int64_t mult;
        if (zero_class) {
            // single level {t}: crossed once iff t lies in [p(u), p(v))
            mult = (pf.p[src[e]] <= tfloor && tfloor < pf.p[g.heads[e]]) ? 1 : 0;
        } else {
            // levels t + Z: a climb of d crosses exactly d of them
            mult = d;
        }
        if (mult > 0) {
            s.cuts.push_back({e, mult});
            s.total_crossings += mult;
        }
    }
    return s;
}

namespace {

struct SegEnd {
    std::int64_t face_key; // ((axis * res) + fx) * res + fy
    std::int64_t level;    // face-anchored level index
    double x, y;           // crossing point, wrapped into [0,1)
};

} // namespace

void assemble_polylines(const TransitionGraph& tg, const PotentialField& pf,
                        CrossSection& section) {
    if (tg.grid.dim != 2)
        throw AnalysisError("polyline assembly is defined for 2D transition graphs only");
    const std::int32_t res_x = tg.grid.res[0], res_y = tg.grid.res[1];
    const double t = section.level;
    const std::int64_t ax = pf.alpha.c[0], ay = pf.alpha.c[1];
    const bool zero_class = pf.alpha.is_zero();

    auto cell = [&](std::int32_t x, std::int32_t y) {
        return tg.grid.index({x, y, 0});
    };
    auto face_key = [&](int axis, std::int32_t fx, std::int32_t fy) {
        return (static_cast<std::int64_t>(axis) * res_x + fx) * res_y + fy;
    };

    // One segment = two endpoints; endpoints meet at (face, level) keys.
    std::vector<std::array<SegEnd, 2>> segs;
    auto emit = [&](const SegEnd& a, const SegEnd& b) { segs.push_back({a, b}); };

    for (std::int32_t cj = 0; cj < res_y; ++cj) {
        for (std::int32_t ci = 0; ci < res_x; ++ci) {
            // duality cell anchored at the SW flow-cell; lifted potentials
            const std::int32_t xm = (ci - 1 + res_x) % res_x;
            const std::int32_t ym = (cj - 1 + res_y) % res_y;
            const std::int64_t wrap_x = (ci == 0) ? ax : 0;
            const std::int64_t wrap_y = (cj == 0) ? ay : 0;
            const double vsw = static_cast<double>(pf.p[cell(xm, ym)]);
            const double vse = static_cast<double>(pf.p[cell(ci, ym)] + wrap_x);
            const double vnw = static_cast<double>(pf.p[cell(xm, cj)] + wrap_y);
            const double vne = static_cast<double>(pf.p[cell(ci, cj)] + wrap_x + wrap_y);
            const double vmin = std::min(std::min(vsw, vse), std::min(vnw, vne));
            const double vmax = std::max(std::max(vsw, vse), std::max(vnw, vne));

            std::int64_t klo = static_cast<std::int64_t>(std::floor(vmin - t)) + 1;
            std::int64_t khi = static_cast<std::int64_t>(std::ceil(vmax - t)) - 1;
            if (zero_class) {
                klo = std::max<std::int64_t>(klo, 0);
                khi = std::min<std::int64_t>(khi, 0);
            }
            for (std::int64_t k = klo; k <= khi; ++k) {
                const double L = t + static_cast<double>(k);
                if (L <= vmin || L >= vmax) continue;
                const int bits = (vsw > L ? 1 : 0) | (vse > L ? 2 : 0) | (vne > L ? 4 : 0) |
                                 (vnw > L ? 8 : 0);
                if (bits == 0 || bits == 15) continue;

                // crossing points on the four dual edges (between cell centers)
                auto mk = [&](int edge) -> SegEnd {
                    SegEnd se{};
                    double a, b; // face-anchored values: a = anchor cell
                    switch (edge) {
                        case 0: // S: vertical face (0, ci, ym), anchor = SW
                            a = vsw;
                            b = vse;
                            se.face_key = face_key(0, ci, ym);
                            se.level = k;
                            se.x = (ci - 0.5 + (L - a) / (b - a)) / res_x;
                            se.y = (ym + 0.5) / static_cast<double>(res_y);
                            break;
                        case 1: // E: horizontal face (1, ci, cj), anchor = SE
                            a = vse;
                            b = vne;
                            se.face_key = face_key(1, ci, cj);
                            se.level = k - wrap_x;
                            se.x = (ci + 0.5) / static_cast<double>(res_x);
                            se.y = (cj - 0.5 + (L - a) / (b - a)) / res_y;
                            break;
                        case 2: // N: vertical face (0, ci, cj), anchor = NW
                            a = vnw;
                            b = vne;
                            se.face_key = face_key(0, ci, cj);
                            se.level = k - wrap_y;
                            se.x = (ci - 0.5 + (L - a) / (b - a)) / res_x;
                            se.y = (cj + 0.5) / static_cast<double>(res_y);
                            break;
                        default: // W: horizontal face (1, xm, cj), anchor = SW
                            a = vsw;
                            b = vnw;
                            se.face_key = face_key(1, xm, cj);
                            se.level = k;
                            se.x = (xm + 0.5) / static_cast<double>(res_x);
                            se.y = (cj - 0.5 + (L - a) / (b - a)) / res_y;
                            break;
                    }
                    se.x -= std::floor(se.x);
                    se.y -= std::floor(se.y);
                    return se;
                };
                switch (bits) {
                    case 1: case 14: emit(mk(3), mk(0)); break;          // SW corner
                    case 2: case 13: emit(mk(0), mk(1)); break;          // SE corner
                    case 4: case 11: emit(mk(1), mk(2)); break;          // NE corner
                    case 8: case 7:  emit(mk(2), mk(3)); break;          // NW corner
                    case 3: case 12: emit(mk(3), mk(1)); break;          // horizontal band
                    case 6: case 9:  emit(mk(0), mk(2)); break;          // vertical band
                    case 5: // SW & NE high: saddle
                        if ((vsw + vse + vne + vnw) / 4.0 > L) {
                            emit(mk(0), mk(1));
                            emit(mk(2), mk(3));
                        } else {
                            emit(mk(3), mk(0));
                            emit(mk(1), mk(2));
                        }
                        break;
                    case 10: // SE & NW high: saddle
                        if ((vsw + vse + vne + vnw) / 4.0 > L) {
                            emit(mk(3), mk(0));
                            emit(mk(1), mk(2));
                        } else {
                            emit(mk(0), mk(1));
                            emit(mk(2), mk(3));
                        }
                        break;
                    default: break;
                }
            }
        }
    }

    // Stitch: every (face, level) key is met by exactly two segment ends.
    std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::int64_t>> at;
    for (std::size_t s = 0; s < segs.size(); ++s) {
        at[{segs[s][0].face_key, segs[s][0].level}].push_back(static_cast<std::int64_t>(s));
        at[{segs[s][1].face_key, segs[s][1].level}].push_back(static_cast<std::int64_t>(s));
    }
    for (const auto& [key, ids] : at)
        if (ids.size() != 2)
            throw AnalysisError("level-set stitching produced a non-manifold point (internal)");

    std::vector<std::uint8_t> used(segs.size(), 0);
    for (const auto& [start_key, start_ids] : at) {
        if (used[start_ids[0]]) continue;
        std::vector<std::array<double, 2>> loop;
        auto key = start_key;
        std::int64_t seg = start_ids[0];
        while (!used[seg]) {
            used[seg] = 1;
            const SegEnd& here =
                (std::pair{segs[seg][0].face_key, segs[seg][0].level} == key) ? segs[seg][0]
                                                                              : segs[seg][1];
            const SegEnd& next =
                (std::pair{segs[seg][0].face_key, segs[seg][0].level} == key) ? segs[seg][1]
                                                                              : segs[seg][0];
            loop.push_back({here.x, here.y});
            key = {next.face_key, next.level};
            const auto& ids = at.at(key);
            seg = (ids[0] == seg) ? ids[1] : ids[0];
        }
        section.polylines.push_back(std::move(loop));
    }
}

bool labelings_equal(const Labeling& a, const Labeling& b) {
    if (a.labels.size() != b.labels.size())
        throw AnalysisError("labelings compare different chain sets");
    if (!(a.alpha == b.alpha))
        throw AnalysisError("labelings compare different classes");
    if (a.labels.empty()) return true;
    const std::int64_t d = a.labels[0] - b.labels[0];
    for (std::size_t i = 1; i < a.labels.size(); ++i)
        if (a.labels[i] - b.labels[i] != d) return false;
    return true;
}

Labeling section_to_labeling(const WeightedDigraph& g, const Covector& alpha,
                             const CrossSection& section) {
    AlphaAnalysis a = analyze_alpha(g, alpha);
    if (!a.quasi_lyapunov_neg)
        throw AnalysisError("section_to_labeling: negative alpha-cycle, no sections exist");
    Labeling l;
    l.alpha = alpha;
    if (a.chains.empty()) return l;

    const std::int64_t n = g.vertex_count();
    const auto w = g.alpha_weights(alpha);
    const auto src = g.edge_sources();
    std::vector<std::int64_t> mult(g.edge_count(), 0);
    for (const auto& [e, m] : section.cuts) mult[e] = m;

    // A cut on a tight within-chain edge means the level set passes through a
    // recurrence chain, where crossing counts stop being well-defined.
    for (std::int64_t e = 0; e < g.edge_count(); ++e) {
        std::int32_t u = src[e], v = g.heads[e];
        if (a.chain_of[u] >= 0 && a.chain_of[u] == a.chain_of[v] &&
            a.potentials[v] - a.potentials[u] + w[e] == 0 && mult[e] > 0)
            throw AnalysisError("the section meets the alpha-recurrent set: a recurrence "
                                "chain is cut");
    }

    // Reconstruct potential differences from crossing counts along any paths:
    // across an edge, p(v) - p(u) = mult - w. Undirected BFS from the base
    // chain representative, checking consistency on back edges.
    std::vector<std::vector<std::pair<std::int32_t, std::int64_t>>> adj(n);
    for (std::int64_t e = 0; e < g.edge_count(); ++e) {
        std::int64_t d = mult[e] - w[e];
        adj[src[e]].push_back({g.heads[e], d});
        adj[g.heads[e]].push_back({src[e], -d});
    }
    constexpr std::int64_t kUnset = std::numeric_limits<std::int64_t>::min();
    std::vector<std::int64_t> val(n, kUnset);
    std::deque<std::int32_t> q;
    std::int32_t base = a.chains[0][0];
    val[base] = 0;
    q.push_back(base);
    while (!q.empty()) {
        std::int32_t u = q.front();
        q.pop_front();
        for (const auto& [v, d] : adj[u]) {
            if (val[v] == kUnset) {
                val[v] = val[u] + d;
                q.push_back(v);
            } else if (val[v] != val[u] + d) {
                throw AnalysisError("inconsistent section: crossing counts do not define a "
                                    "potential");
            }
        }
    }
    for (const auto& chain : a.chains) {
        if (val[chain[0]] == kUnset)
            throw AnalysisError("a chain is not connected to the base chain: the labeling "
                                "is not determined by the section");
        l.labels.push_back(val[chain[0]]);
    }
    return l;
}

FriedSumResult fried_sum(const WeightedDigraph& g, const Covector& alpha1, const Labeling& l1,
                         const Covector& alpha2, const Labeling& l2) {
    Covector sum_alpha = alpha1 + alpha2;
    if (sum_alpha.is_zero())
        throw AnalysisError("fried_sum: the sum class is zero");
    // Validates quasi-Lyapunov and feasibility of both inputs.
    PotentialField p1 = synthesize_potential(g, alpha1, l1);
    PotentialField p2 = synthesize_potential(g, alpha2, l2);

    AlphaChainGraph cg = build_chain_graph(g, sum_alpha);
    FriedSumResult r;
    r.sum.alpha = sum_alpha;
    for (std::int32_t i = 0; i < cg.chain_count(); ++i) {
        std::int32_t rep = cg.representatives[i];
        r.sum.labels.push_back(p1.p[rep] + p2.p[rep]);
    }
    if (!r.sum.labels.empty()) {
        const std::int64_t base = r.sum.labels[0];
        for (auto& v : r.sum.labels) v -= base;
    }
    std::string why;
    r.feasible = labeling_feasible(cg, r.sum, &why);
    if (!r.feasible) r.witness = why;
    return r;
}

void write_section_svg(std::ostream& out, const TransitionGraph& tg,
                       const std::vector<std::vector<std::int32_t>>& chains,
                       const CrossSection& section) {
    if (tg.grid.dim != 2) throw AnalysisError("SVG rendering is 2D-only");
    const double S = 640.0;
    const std::int32_t rx = tg.grid.res[0], ry = tg.grid.res[1];
    char buf[256];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" "
           "viewBox=\"0 0 640 640\">\n";
    out << "  <title>section of class " << section.alpha.to_string() << " at level ";
    std::snprintf(buf, sizeof buf, "%.6g", section.level);
    out << buf << "</title>\n";
    out << "  <rect width=\"640\" height=\"640\" fill=\"white\"/>\n";
    for (const auto& chain : chains)
        for (std::int32_t c : chain) {
            auto xyz = tg.grid.coords(c);
            double x = S * xyz[0] / rx;
            double y = S - S * (xyz[1] + 1.0) / ry; // flip: math y up, svg y down
            std::snprintf(buf, sizeof buf,
                          "  <rect x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" "
                          "fill=\"#f2a0a0\"/>\n",
                          x, y, S / rx, S / ry);
            out << buf;
        }
    for (const auto& loop : section.polylines) {
        if (loop.empty()) continue;
        std::string d;
        bool pen_down = false;
        auto move = [&](double px, double py, bool draw) {
            std::snprintf(buf, sizeof buf, "%c%.3f %.3f ", draw ? 'L' : 'M', S * px,
                          S * (1.0 - py));
            d += buf;
        };
        for (std::size_t i = 0; i <= loop.size(); ++i) {
            const auto& pt = loop[i % loop.size()];
            if (i == 0) {
                move(pt[0], pt[1], false);
                pen_down = true;
                continue;
            }
            const auto& prev = loop[(i - 1) % loop.size()];
            bool jump = std::abs(pt[0] - prev[0]) > 0.5 || std::abs(pt[1] - prev[1]) > 0.5;
            if (jump) {
                if (i == loop.size()) break;
                move(pt[0], pt[1], false);
            } else {
                move(pt[0], pt[1], pen_down);
            }
        }
        out << "  <path d=\"" << d << "\" fill=\"none\" stroke=\"#1f6feb\" "
            << "stroke-width=\"2\"/>\n";
    }
    out << "</svg>\n";
}

} // namespace torsec
