#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "torsec/alpha.hpp"
#include "torsec/covector.hpp"
#include "torsec/graph.hpp"
#include "torsec/transition_graph.hpp"

namespace torsec {

/// Alpha-recurrence chains with the integer shift matrix of the lifted
/// reachability order: shifts[i][j] = minimum alpha-weight over paths from
/// chain i to chain j in the full graph (SHIFT_INF if unreachable, 0 on the
/// diagonal). Shift units are alpha-weights, i.e. already multiples of
/// n_alpha. When built over several refinement levels the per-level values
/// are kept and an entry is flagged divergent if it strictly increased at
/// every level — the finite-resolution stand-in for a cover-level non-edge.
struct AlphaChainGraph {
    static constexpr std::int64_t SHIFT_INF = std::numeric_limits<std::int64_t>::max();

    Covector alpha;
    std::int64_t n_alpha = 0;
    int levels = 1;
    std::vector<std::vector<std::int32_t>> chains; // base-level cells, sorted
    std::vector<std::int32_t> representatives;     // smallest cell of each chain
    std::vector<std::vector<std::int64_t>> shifts;
    std::vector<std::vector<std::uint8_t>> reachable;
    std::vector<std::vector<std::uint8_t>> divergent;
    std::vector<std::vector<std::vector<std::int64_t>>> level_shifts; // [level][i][j]

    std::int32_t chain_count() const { return static_cast<std::int32_t>(chains.size()); }

    /// All ordered pairs reachable with finite, non-divergent shifts.
    bool transitive() const;
};

/// Chain graph at the graph's own resolution (one level, no divergence data).
/// Precondition: is_quasi_lyapunov_neg. Errors otherwise.
AlphaChainGraph build_chain_graph(const WeightedDigraph& g, const Covector& alpha);

/// Multi-level form: recomputes on `refinement_levels - 1` successive 2x
/// refinements, matches chains to the base level by maximal spatial overlap
/// (ambiguity is an error, not a guess), and flags entries divergent when
/// they strictly increase at every level.
AlphaChainGraph build_chain_graph(const TransitionGraph& tg, const Covector& alpha,
                                  int refinement_levels);

/// One isotopy class of partial cross-sections: an integer label per
/// alpha-chain (chain indexing as in AlphaChainGraph / AlphaAnalysis),
/// normalized so the first chain gets label 0. On the cover the labeling
/// extends by equivariance: label(deck^k x) = label(x) + k * n_alpha.
struct Labeling {
    Covector alpha;
    std::vector<std::int64_t> labels;

    bool operator==(const Labeling& o) const = default;
};

/// Feasibility constraint (fixed by the sign audit, see AlphaAnalysis):
/// label(i) - label(j) <= shifts[i][j] for every reachable pair (i, j).
/// Divergent entries are skipped: they model cover-level non-edges.
bool labeling_feasible(const AlphaChainGraph& cg, const Labeling& l, std::string* why = nullptr);

struct LabelingList {
    std::vector<Labeling> items;
    bool truncated = false; // window-bounded families of an infinite set
};

/// All feasible labelings. Complete without a window when the chain graph is
/// transitive (interval bounds label(i) in [-shifts[0][i], shifts[i][0]]);
/// otherwise `window` is required (labels range over [-window, window]) and
/// the result is marked truncated. Errors: window omitted when required.
LabelingList enumerate_labelings(const AlphaChainGraph& cg,
                                 std::optional<std::int64_t> window = std::nullopt);

enum class CardinalityKind { empty, singleton, finite, countably_infinite };

struct Cardinality {
    CardinalityKind kind = CardinalityKind::empty;
    std::int64_t count = 0; // meaningful for finite (and 1 for singleton)
    std::string reason;
};

/// Cardinality of the set of isotopy classes, refining a nonempty existence
/// verdict. alpha != 0: <= 1 chain -> singleton; transitive -> finite with
/// count = number of feasible labelings; otherwise countably infinite.
/// alpha = 0: countably infinite (errors when chain_recurrent, since
/// existence is empty there and this operation must not be called).
Cardinality classify_cardinality(const AlphaChainGraph& cg, const Covector& alpha,
                                 bool chain_recurrent);

/// Integer vertex potential representing an equivariant Lyapunov map on the
/// cover: one value per base vertex; value(deck^k x) = value(x) + k*n_alpha.
/// Feasible: p(v) - p(u) + w_alpha(u->v) >= 0 on every edge, with equality on
/// tight edges; equals the anchored chain labels on alpha-recurrent vertices.
struct PotentialField {
    Covector alpha;
    Labeling source;
    std::vector<std::int64_t> p;
};

/// Builds the potential for a feasible labeling by shortest-path relaxation
/// anchored at the chain labels. Errors: infeasible labeling (reported with a
/// witness constraint).
PotentialField synthesize_potential(const WeightedDigraph& g, const Covector& alpha,
                                    const Labeling& labeling);

/// A partial cross-section as a graph cut: every edge crossed positively by
/// the level set {t + k : k in Z} of the cover potential, with multiplicity
/// p(v) + w_alpha - p(u) intersected against the levels. The 2D polyline
/// assembly is presentation-only and never feeds back into the math.
struct CrossSection {
    Covector alpha;
    double level = 0.5;
    Labeling source;
    std::vector<std::pair<std::int64_t, std::int64_t>> cuts; // (edge id, multiplicity)
    std::int64_t total_crossings = 0;
    std::vector<std::vector<std::array<double, 2>>> polylines; // closed loops, 2D only
};

/// Default level: midpoint of the largest gap between consecutive chain label
/// values modulo n_alpha (0.5 when there are no chains or a single value).
double default_level(const PotentialField& pf, const AlphaChainGraph& cg);

/// Cuts the graph along the potential level set. Precondition: t avoids all
/// chain label values modulo the equivariance period (for integer potentials:
/// frac(t) != 0). Errors: invalid level; negative crossing (internal).
CrossSection extract_section(const WeightedDigraph& g, const PotentialField& pf, double t);

/// Fills section.polylines by marching the dual grid of a 2D transition
/// graph: one closed polyline chain per cover level, vertices at cell-face
/// midpoints of the fundamental domain.
void assemble_polylines(const TransitionGraph& tg, const PotentialField& pf,
                        CrossSection& section);

/// True iff the labelings differ by a constant (the isotopy criterion).
/// Errors: mismatched chain counts.
bool labelings_equal(const Labeling& a, const Labeling& b);

/// Reconstructs the labeling from a section by counting crossings along
/// paths from the base chain to every chain. Errors: section meets the
/// alpha-recurrent set (a recurrent vertex sits on a cut level).
Labeling section_to_labeling(const WeightedDigraph& g, const Covector& alpha,
                             const CrossSection& section);

/// Fried sum: restricts both labelings to the chains of Rec_{a1+a2} (each sum
/// chain lies inside one chain of each summand) and adds labels. The result
/// is checked for feasibility; infeasibility is a reported finding (the map
/// is neither injective nor surjective in general), not an exception.
struct FriedSumResult {
    bool feasible = false;
    Labeling sum;
    std::string witness; // set when infeasible
};
FriedSumResult fried_sum(const WeightedDigraph& g, const Covector& alpha1, const Labeling& l1,
                         const Covector& alpha2, const Labeling& l2);

/// SVG rendering: unit-square fundamental domain, alpha-recurrent cells
/// shaded, section polylines drawn per level. 2D only.
void write_section_svg(std::ostream& out, const TransitionGraph& tg,
                       const std::vector<std::vector<std::int32_t>>& chains,
                       const CrossSection& section);

} // namespace torsec
