#include "torsec/alpha.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "torsec/errors.hpp"
#include "torsec/recurrence.hpp"

namespace torsec {

std::int64_t alpha_weight(const Winding& k, const Covector& alpha) {
    std::int64_t s = 0;
    for (int i = 0; i < alpha.dim; ++i) s += alpha.c[i] * static_cast<std::int64_t>(k[i]);
    return s;
}

bool is_quasi_lyapunov_neg(const WeightedDigraph& g, const Covector& alpha) {
    return !bellman_potentials(g, g.alpha_weights(alpha)).has_negative_cycle;
}

AlphaAnalysis analyze_alpha(const WeightedDigraph& g, const Covector& alpha) {
    AlphaAnalysis a;
    a.alpha = alpha;
    const auto w = g.alpha_weights(alpha);
    BellmanResult br = bellman_potentials(g, w);
    if (br.has_negative_cycle) {
        a.quasi_lyapunov_neg = false;
        a.witness_cycle = std::move(br.cycle);
        a.witness_weight = br.cycle_weight;
        a.chain_of.assign(g.vertex_count(), -1);
        return a;
    }
    a.quasi_lyapunov_neg = true;
    a.potentials.resize(br.dist.size());
    for (std::size_t v = 0; v < br.dist.size(); ++v) a.potentials[v] = -br.dist[v];

    // Tight subgraph: edges where the potential inequality holds with equality
    // (p(v) - p(u) + w == 0). Its cycles are exactly the zero-alpha-weight
    // cycles of g, whose vertices form the alpha-recurrent set.
    std::vector<EdgeRec> tight;
    const auto src = g.edge_sources();
    for (std::int64_t e = 0; e < g.edge_count(); ++e) {
        std::int32_t u = src[e], v = g.heads[e];
        if (a.potentials[v] - a.potentials[u] + w[e] == 0)
            tight.push_back(EdgeRec{u, v, g.winds[e]});
    }
    WeightedDigraph tg = WeightedDigraph::from_edges(g.dim, g.vertex_count(), tight);
    ChainDecomposition cd = chain_decomposition(tg);
    a.chain_of = std::move(cd.chain_of);
    a.chains = std::move(cd.chains);
    a.recurrent.reserve(g.vertex_count());
    for (std::int64_t v = 0; v < g.vertex_count(); ++v)
        if (a.chain_of[v] >= 0) a.recurrent.push_back(static_cast<std::int32_t>(v));
    return a;
}

AlphaAnalysis alpha_recurrent(const WeightedDigraph& g, const Covector& alpha) {
    AlphaAnalysis a = analyze_alpha(g, alpha);
    if (!a.quasi_lyapunov_neg) {
        std::ostringstream os;
        os << "alpha-recurrent set undefined for alpha=" << alpha.to_string()
           << ": a cycle of negative alpha-weight " << a.witness_weight << " exists";
        throw AnalysisError(os.str());
    }
    return a;
}

Rational direction_support(const WeightedDigraph& g, const Covector& alpha) {
    auto mcm = min_cycle_mean(g, g.alpha_weights(alpha));
    if (!mcm)
        throw AnalysisError("direction support undefined: the graph has no cycles");
    return *mcm;
}

ExistenceVerdict existence(const WeightedDigraph& g, const Covector& alpha) {
    ExistenceVerdict v;
    if (alpha.is_zero()) {
        if (is_chain_recurrent(g)) {
            v.nonempty = false;
            v.reason = "zero class: the flow is chain-recurrent, so every section meets "
                       "recurrent pseudo-orbits and must pair nontrivially with them";
        } else {
            v.nonempty = true;
            v.reason = "zero class: the flow is not chain-recurrent; a wandering region "
                       "carries a null-class partial section";
        }
        return v;
    }
    const auto w = g.alpha_weights(alpha);
    BellmanResult br = bellman_potentials(g, w);
    if (br.has_negative_cycle) {
        v.nonempty = false;
        std::ostringstream os;
        os << "a periodic pseudo-orbit with alpha-weight " << br.cycle_weight
           << " < 0 obstructs any non-decreasing equivariant potential";
        v.reason = os.str();
        v.witness_cycle = std::move(br.cycle);
        v.witness_weight = br.cycle_weight;
    } else {
        v.nonempty = true;
        v.reason = "no negative alpha-cycle: a non-decreasing equivariant potential "
                   "exists and a level set of it is a section of class alpha";
    }
    return v;
}

bool fried_positive(const WeightedDigraph& g, const Covector& alpha) {
    AlphaAnalysis a = analyze_alpha(g, alpha);
    return a.quasi_lyapunov_neg && a.recurrent.empty();
}

std::vector<Covector> direction_fan(int dim, int order) {
    if (dim != 2 && dim != 3) throw ConfigError("direction fan needs dim 2 or 3");
    std::vector<Covector> fan;
    if (dim == 2) {
        if (order < 1) throw ConfigError("direction fan order must be >= 1");
        for (std::int64_t a = -order; a <= order; ++a)
            for (std::int64_t b = -order; b <= order; ++b) {
                if (a == 0 && b == 0) continue;
                if (std::gcd(std::llabs(a), std::llabs(b)) != 1) continue;
                fan.push_back(Covector::of(a, b));
            }
        // counter-clockwise starting from (1,0); exact integer comparator
        auto half = [](const Covector& v) {
            return (v.c[1] > 0 || (v.c[1] == 0 && v.c[0] > 0)) ? 0 : 1;
        };
        std::sort(fan.begin(), fan.end(), [&](const Covector& p, const Covector& q) {
            int hp = half(p), hq = half(q);
            if (hp != hq) return hp < hq;
            std::int64_t cross = p.c[0] * q.c[1] - p.c[1] * q.c[0];
            if (cross != 0) return cross > 0;
            return p.c < q.c; // collinear duplicates cannot occur (primitive)
        });
        return fan;
    }
    // 3D: the twelve icosahedral directions in the (0, 8, 13) rational
    // approximation (13/8 for the golden ratio), cyclic coordinate order.
    for (int s1 : {1, -1})
        for (int s2 : {1, -1}) {
            fan.push_back(Covector::of(0, 8 * s1, 13 * s2));
            fan.push_back(Covector::of(13 * s2, 0, 8 * s1));
            fan.push_back(Covector::of(8 * s1, 13 * s2, 0));
        }
    std::sort(fan.begin(), fan.end());
    return fan;
}

} // namespace torsec
