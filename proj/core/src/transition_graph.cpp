#include "torsec/transition_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "torsec/errors.hpp"

namespace torsec {

// ---------------------------------------------------------------------------
// WeightedDigraph

WeightedDigraph WeightedDigraph::from_edges(int dim, std::int64_t n, std::vector<EdgeRec> edges) {
    for (const auto& e : edges)
        if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
            throw AnalysisError("edge endpoint out of range");
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    WeightedDigraph g;
    g.dim = dim;
    g.offsets.assign(n + 1, 0);
    g.heads.reserve(edges.size());
    g.winds.reserve(edges.size());
    for (const auto& e : edges) ++g.offsets[e.u + 1];
    for (std::int64_t i = 0; i < n; ++i) g.offsets[i + 1] += g.offsets[i];
    for (const auto& e : edges) {
        g.heads.push_back(e.v);
        g.winds.push_back(e.k);
    }
    return g;
}

std::vector<std::int64_t> WeightedDigraph::alpha_weights(const Covector& alpha) const {
    std::vector<std::int64_t> w(winds.size());
    for (std::size_t i = 0; i < winds.size(); ++i) w[i] = alpha(winds[i]);
    return w;
}

std::vector<std::int32_t> WeightedDigraph::edge_sources() const {
    std::vector<std::int32_t> src(heads.size());
    for (std::int64_t u = 0; u < vertex_count(); ++u)
        for (std::int64_t e = offsets[u]; e < offsets[u + 1]; ++e)
            src[e] = static_cast<std::int32_t>(u);
    return src;
}

// ---------------------------------------------------------------------------
// GridSpec

double GridSpec::cell_diameter() const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += 1.0 / (static_cast<double>(res[i]) * res[i]);
    return std::sqrt(s);
}

std::array<int, 3> GridSpec::coords(std::int64_t cell) const {
    std::array<int, 3> c{0, 0, 0};
    c[0] = static_cast<int>(cell % res[0]);
    cell /= res[0];
    if (dim >= 2) {
        c[1] = static_cast<int>(cell % res[1]);
        cell /= res[1];
    }
    if (dim == 3) c[2] = static_cast<int>(cell);
    return c;
}

std::int64_t GridSpec::index(const std::array<int, 3>& c) const {
    auto wrap = [](int v, int r) {
        int m = v % r;
        return m < 0 ? m + r : m;
    };
    std::int64_t id = wrap(c[0], res[0]);
    if (dim >= 2) id += static_cast<std::int64_t>(res[0]) * wrap(c[1], res[1]);
    if (dim == 3) id += static_cast<std::int64_t>(res[0]) * res[1] * wrap(c[2], res[2]);
    return id;
}

std::array<double, 3> GridSpec::center(std::int64_t cell) const {
    auto c = coords(cell);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int i = 0; i < dim; ++i) x[i] = (c[i] + 0.5) / res[i];
    return x;
}

std::int64_t resolve_cell_cap(std::int64_t explicit_cap) {
    if (explicit_cap > 0) return explicit_cap;
    if (const char* env = std::getenv("TORSEC_MAX_CELLS")) {
        char* end = nullptr;
        long long v = std::strtoll(env, &end, 10);
        if (end && *end == '\0' && v > 0) return v;
        throw ConfigError("TORSEC_MAX_CELLS must be a positive integer");
    }
    return std::int64_t{1} << 22;
}

// ---------------------------------------------------------------------------
// Build

namespace {

double wrap01(double x) {
    double f = x - std::floor(x);
    return f >= 1.0 ? 0.0 : f;
}

// Nearest integer with ties toward zero (the jump-closure rounding rule).
std::int32_t round_ties_to_zero(double t) {
    double r = std::round(t); // ties away from zero
    if (std::fabs(t - std::trunc(t)) == 0.5) r = std::trunc(t);
    return static_cast<std::int32_t>(r);
}

// Distance on the circle from coordinate a (in [0,1)) to the cell interval
// [ci/res, (ci+1)/res]. The interval is shorter than 1/2 (build validation
// forces every per-axis cell below the diameter bound), so the nearest point
// of the arc is an endpoint whenever a lies outside it.
double axis_box_dist(double a, int ci, int res) {
    double lo = static_cast<double>(ci) / res;
    double hi = static_cast<double>(ci + 1) / res;
    if (a >= lo && a <= hi) return 0.0;
    auto cd = [](double x, double y) {
        double d = std::fabs(x - y);
        return d > 0.5 ? 1.0 - d : d;
    };
    return std::min(cd(a, lo), cd(a, hi));
}

struct AxisCandidate {
    int ci;
    double dist;
};

void axis_candidates(double a, int res, double eps, std::vector<AxisCandidate>& out) {
    out.clear();
    int center = static_cast<int>(std::floor(a * res));
    int halfw = static_cast<int>(std::ceil(eps * res)) + 1;
    int lo = center - halfw, hi = center + halfw;
    if (hi - lo + 1 >= res) { lo = 0; hi = res - 1; }
    for (int raw = lo; raw <= hi; ++raw) {
        int ci = raw % res;
        if (ci < 0) ci += res;
        double d = axis_box_dist(a, ci, res);
        if (d <= eps) out.push_back({ci, d});
    }
    // The window can wrap onto itself only when clamped to [0, res), in which
    // case indices are already unique.
}

void build_range(const FlowSpec& flow, const GridSpec& grid, double T, double eps, int rk_steps,
                 int samples_per_cell, std::int64_t begin, std::int64_t end,
                 std::vector<EdgeRec>& out) {
    const int d = grid.dim;
    std::vector<AxisCandidate> ax[3];
    std::vector<std::array<double, 3>> samples;
    for (std::int64_t u = begin; u < end; ++u) {
        samples.clear();
        auto c = grid.center(u);
        samples.push_back(c);
        if (samples_per_cell > 1) {
            auto cc = grid.coords(u);
            int corners = 1 << d;
            for (int m = 0; m < corners; ++m) {
                std::array<double, 3> s{0, 0, 0};
                for (int i = 0; i < d; ++i)
                    s[i] = (cc[i] + ((m >> i) & 1)) / static_cast<double>(grid.res[i]);
                samples.push_back(s);
            }
        }
        for (const auto& s : samples) {
            auto e = integrate_lift(flow, s, T, rk_steps);
            double ew[3] = {0, 0, 0};
            for (int i = 0; i < d; ++i) ew[i] = wrap01(e[i]);
            for (int i = 0; i < d; ++i) axis_candidates(ew[i], grid.res[i], eps, ax[i]);
            const double eps2 = eps * eps;
            for (const auto& a0 : ax[0]) {
                for (const auto& a1 : ax[1]) { // dim >= 2 always
                    double d01 = a0.dist * a0.dist + a1.dist * a1.dist;
                    if (d01 > eps2) continue;
                    if (d == 3) {
                        for (const auto& a2 : ax[2]) {
                            if (d01 + a2.dist * a2.dist > eps2) continue;
                            std::array<int, 3> tc{a0.ci, a1.ci, a2.ci};
                            std::int64_t v = grid.index(tc);
                            auto cv = grid.center(v);
                            Winding k{0, 0, 0};
                            for (int i = 0; i < d; ++i) k[i] = round_ties_to_zero(e[i] - cv[i]);
                            out.push_back({static_cast<std::int32_t>(u),
                                           static_cast<std::int32_t>(v), k});
                        }
                    } else {
                        std::array<int, 3> tc{a0.ci, a1.ci, 0};
                        std::int64_t v = grid.index(tc);
                        auto cv = grid.center(v);
                        Winding k{0, 0, 0};
                        for (int i = 0; i < d; ++i) k[i] = round_ties_to_zero(e[i] - cv[i]);
                        out.push_back({static_cast<std::int32_t>(u),
                                       static_cast<std::int32_t>(v), k});
                    }
                }
            }
        }
    }
}

} // namespace

TransitionGraph build_transition_graph(const FlowSpec& flow, const GridSpec& grid,
                                       const BuildParams& params) {
    if (grid.dim != flow.dim)
        throw ConfigError("grid dimension does not match the flow dimension");
    if (grid.dim != 2 && grid.dim != 3) throw ConfigError("dimension must be 2 or 3");
    for (int i = 0; i < grid.dim; ++i)
        if (grid.res[i] < 1) throw ConfigError("grid resolution must be positive");
    if (params.T <= 0) throw ConfigError("T must be positive");
    if (params.rk_steps < 1) throw ConfigError("rk_steps must be >= 1");
    if (params.samples_per_cell < 1) throw ConfigError("samples_per_cell must be >= 1");

    std::int64_t cap = resolve_cell_cap(params.max_cells);
    if (grid.cell_count() > cap)
        throw ResourceError("cell count " + std::to_string(grid.cell_count()) +
                            " exceeds the resource cap " + std::to_string(cap) +
                            " (TORSEC_MAX_CELLS)");

    const double diam = grid.cell_diameter();
    double eps = params.epsilon < 0 ? diam : params.epsilon;
    if (eps >= 0.5)
        throw ConfigError("epsilon must be < 1/2 (jump closure would be ambiguous)");
    if (eps < diam)
        throw ConfigError("epsilon must be >= the cell diameter (shadowing guarantee)");

    const std::int64_t n = grid.cell_count();
    int threads = std::max(1, params.threads);
    threads = static_cast<int>(std::min<std::int64_t>(threads, n));

    std::vector<std::vector<EdgeRec>> buffers(threads);
    if (threads == 1) {
        build_range(flow, grid, params.T, eps, params.rk_steps, params.samples_per_cell, 0, n,
                    buffers[0]);
    } else {
        std::vector<std::thread> pool;
        std::int64_t chunk = (n + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            std::int64_t b = t * chunk, e = std::min<std::int64_t>(n, b + chunk);
            pool.emplace_back([&, b, e, t] {
                build_range(flow, grid, params.T, eps, params.rk_steps, params.samples_per_cell,
                            b, e, buffers[t]);
            });
        }
        for (auto& th : pool) th.join();
    }
    std::vector<EdgeRec> edges;
    std::size_t total = 0;
    for (auto& b : buffers) total += b.size();
    edges.reserve(total);
    for (auto& b : buffers) edges.insert(edges.end(), b.begin(), b.end());

    TransitionGraph tg;
    tg.g = WeightedDigraph::from_edges(grid.dim, n, std::move(edges));
    tg.grid = grid;
    tg.flow = flow;
    tg.T = params.T;
    tg.epsilon = eps;
    tg.rk_steps = params.rk_steps;
    tg.samples_per_cell = params.samples_per_cell;
    tg.threads = threads;

    for (std::int64_t u = 0; u < n; ++u)
        if (tg.g.offsets[u] == tg.g.offsets[u + 1])
            throw AnalysisError("transition graph invariant violated: sink cell " +
                                std::to_string(u));
    return tg;
}

TransitionGraph refine(const TransitionGraph& tg, int factor) {
    if (factor < 2) throw ConfigError("refine factor must be >= 2");
    GridSpec g = tg.grid;
    for (int i = 0; i < g.dim; ++i) {
        std::int64_t r = static_cast<std::int64_t>(g.res[i]) * factor;
        if (r > (std::int64_t{1} << 30)) throw ResourceError("refined resolution overflows");
        g.res[i] = static_cast<int>(r);
    }
    BuildParams p;
    p.T = tg.T;
    p.epsilon = -1.0; // refined cell diameter
    p.rk_steps = tg.rk_steps;
    p.samples_per_cell = tg.samples_per_cell;
    p.threads = tg.threads;
    return build_transition_graph(tg.flow, g, p);
}

// ---------------------------------------------------------------------------
// Interchange format

namespace {

void write_edges(std::ostream& out, const WeightedDigraph& g) {
    auto src = g.edge_sources();
    for (std::int64_t e = 0; e < g.edge_count(); ++e) {
        out << "e " << src[e] << ' ' << g.heads[e] << ' ' << g.winds[e][0] << ' '
            << g.winds[e][1];
        if (g.dim == 3) out << ' ' << g.winds[e][2];
        out << '\n';
    }
}

} // namespace

void export_graph(std::ostream& out, const WeightedDigraph& g) {
    out << "torsec-graph v1\n";
    out << "dim " << g.dim << '\n';
    out << "vertices " << g.vertex_count() << '\n';
    out << "edges " << g.edge_count() << '\n';
    write_edges(out, g);
}

void export_graph(std::ostream& out, const TransitionGraph& tg) {
    char buf[64];
    out << "torsec-graph v1\n";
    out << "dim " << tg.g.dim << '\n';
    out << "vertices " << tg.g.vertex_count() << '\n';
    out << "edges " << tg.g.edge_count() << '\n';
    out << "grid";
    for (int i = 0; i < tg.grid.dim; ++i) out << ' ' << tg.grid.res[i];
    out << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", tg.T);
    out << "T " << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", tg.epsilon);
    out << "epsilon " << buf << '\n';
    write_edges(out, tg.g);
}

ImportedGraph import_graph(std::istream& in) {
    std::string header, version;
    if (!(in >> header >> version) || header != "torsec-graph" || version != "v1")
        throw ConfigError("graph import: expected 'torsec-graph v1' header");
    ImportedGraph ig;
    int dim = 0;
    std::int64_t n = -1, m = -1;
    std::vector<EdgeRec> edges;
    std::string key;
    while (in >> key) {
        if (key == "dim") {
            in >> dim;
            if (dim != 2 && dim != 3) throw ConfigError("graph import: dim must be 2 or 3");
        } else if (key == "vertices") {
            in >> n;
        } else if (key == "edges") {
            in >> m;
            if (m >= 0) edges.reserve(m);
        } else if (key == "grid") {
            GridSpec gs;
            gs.dim = dim;
            for (int i = 0; i < dim; ++i) in >> gs.res[i];
            ig.grid = gs;
        } else if (key == "T") {
            in >> ig.T;
        } else if (key == "epsilon") {
            in >> ig.epsilon;
        } else if (key == "e") {
            EdgeRec e;
            in >> e.u >> e.v >> e.k[0] >> e.k[1];
            if (dim == 3) in >> e.k[2];
            if (!in) throw ConfigError("graph import: malformed edge line");
            edges.push_back(e);
        } else {
            throw ConfigError("graph import: unknown record '" + key + "'");
        }
    }
    if (dim == 0 || n < 0) throw ConfigError("graph import: missing dim/vertices header");
    if (m >= 0 && static_cast<std::int64_t>(edges.size()) != m)
        throw ConfigError("graph import: edge count mismatch");
    ig.g = WeightedDigraph::from_edges(dim, n, std::move(edges));
    return ig;
}

} // namespace torsec
