#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "torsec/errors.hpp"
#include "torsec/recurrence.hpp"
#include "torsec/sections.hpp"
#include "torsec/transition_graph.hpp"

using namespace torsec;
using namespace torsec::testing;

namespace {

WeightedDigraph toy(int n, std::vector<EdgeRec> edges) {
    return WeightedDigraph::from_edges(2, n, std::move(edges));
}

/// Two zero-weight loops joined both ways by weight-1 edges (alpha = (0,1)):
/// the canonical two-chain graph with shifts a(0,1) = a(1,0) = 1.
WeightedDigraph two_chain_toy() {
    return toy(2, {{0, 0, {1, 0, 0}},
                   {1, 1, {1, 0, 0}},
                   {0, 1, {0, 1, 0}},
                   {1, 0, {0, 1, 0}}});
}

} // namespace

TEST_CASE("two-chain toy: shifts, feasibility, and the count of three") {
    WeightedDigraph g = two_chain_toy();
    const Covector a = Covector::of(0, 1);
    AlphaChainGraph cg = build_chain_graph(g, a);
    REQUIRE(cg.chain_count() == 2);
    CHECK(cg.chains[0] == std::vector<std::int32_t>{0});
    CHECK(cg.chains[1] == std::vector<std::int32_t>{1});
    CHECK(cg.n_alpha == 1);
    CHECK(cg.shifts[0][1] == 1);
    CHECK(cg.shifts[1][0] == 1);
    CHECK(cg.shifts[0][0] == 0);
    CHECK(cg.transitive());

    // label(i) - label(j) <= a(i,j): with both shifts 1 the second label ranges
    // over {-1, 0, 1} once the first is pinned to 0
    LabelingList all = enumerate_labelings(cg);
    CHECK_FALSE(all.truncated);
    REQUIRE(all.items.size() == 3);
    for (std::int64_t v : {-1, 0, 1}) {
        Labeling l{a, {0, v}};
        CHECK(labeling_feasible(cg, l));
    }
    std::string why;
    Labeling bad{a, {0, 2}};
    CHECK_FALSE(labeling_feasible(cg, bad, &why));
    CHECK(!why.empty());
    CHECK(brute_labeling_count(cg) == 3);

    Cardinality card = classify_cardinality(cg, a, is_chain_recurrent(g));
    CHECK(card.kind == CardinalityKind::finite);
    CHECK(card.count == 3);
}

TEST_CASE("no recurrence chains: the labeling family is the single empty one") {
    TransitionGraph tg = build_transition_graph(FlowSpec::builtin("reeb2d"),
                                                GridSpec{2, {64, 64, 1}}, BuildParams{});
    const Covector a = Covector::of(0, 1);
    AlphaChainGraph cg = build_chain_graph(tg.g, a);
    CHECK(cg.chain_count() == 0);
    LabelingList all = enumerate_labelings(cg);
    CHECK_FALSE(all.truncated);
    REQUIRE(all.items.size() == 1);
    CHECK(all.items[0].labels.empty());
    Cardinality card = classify_cardinality(cg, a, is_chain_recurrent(tg.g));
    CHECK(card.kind == CardinalityKind::singleton);
    CHECK(card.count == 1);
}

TEST_CASE("vertical drift yields one section loop of horizontal class") {
    TransitionGraph tg = build_transition_graph(FlowSpec::builtin("constant"),
                                                GridSpec{2, {16, 16, 1}}, BuildParams{});
    const Covector a = Covector::of(0, 1);
    AlphaChainGraph cg = build_chain_graph(tg.g, a);
    CHECK(cg.chain_count() == 0);
    PotentialField pf = synthesize_potential(tg.g, a, Labeling{a, {}});
    const double t = default_level(pf, cg);
    CrossSection sec = extract_section(tg.g, pf, t);
    CHECK(sec.total_crossings > 0);
    for (const auto& [e, mult] : sec.cuts) CHECK(mult >= 1);
    assemble_polylines(tg, pf, sec);
    REQUIRE(sec.polylines.size() == 1);
    auto cls = polyline_class(sec.polylines[0]);
    CHECK(std::abs(cls[1]) == 0);
    CHECK(std::abs(cls[0]) == 1); // a horizontal circle cuts the vertical flow
}

TEST_CASE("slow-lane fixture: window enumeration counts 2w+1 labelings") {
    TransitionGraph tg = build_transition_graph(FlowSpec::builtin("slowed-vertical"),
                                                GridSpec{2, {64, 64, 1}}, BuildParams{});
    const Covector a = Covector::of(0, 1);
    AlphaChainGraph cg3 = build_chain_graph(tg, a, 3);
    REQUIRE(cg3.chain_count() == 2);
    CHECK(cg3.divergent[0][1]);
    CHECK(cg3.divergent[1][0]);
    CHECK_FALSE(cg3.transitive());
    CHECK_THROWS_AS(enumerate_labelings(cg3), AnalysisError); // window required
    LabelingList w5 = enumerate_labelings(cg3, 5);
    CHECK(w5.truncated);
    CHECK(w5.items.size() == 11); // labels (0, k), k in [-5, 5]
    for (const auto& l : w5.items) CHECK(l.labels[0] == 0);

    Cardinality card = classify_cardinality(cg3, a, is_chain_recurrent(tg.g));
    CHECK(card.kind == CardinalityKind::countably_infinite);
    CHECK(card.reason.find("divergent") != std::string::npos);

    // per-level shifts strictly increase: the finite-resolution signature of
    // an unbounded lifted separation
    REQUIRE(cg3.level_shifts.size() == 3);
    CHECK(cg3.level_shifts[0][0][1] < cg3.level_shifts[1][0][1]);
    CHECK(cg3.level_shifts[1][0][1] < cg3.level_shifts[2][0][1]);
}

TEST_CASE("synthesized potentials are feasible and anchored at the labels") {
    TransitionGraph tg = build_transition_graph(FlowSpec::builtin("slowed-vertical"),
                                                GridSpec{2, {32, 32, 1}}, BuildParams{});
    const Covector a = Covector::of(0, 1);
    AlphaChainGraph cg = build_chain_graph(tg.g, a);
    REQUIRE(cg.chain_count() == 2);
    Labeling l{a, {0, 3}};
    REQUIRE(labeling_feasible(cg, l));
    PotentialField pf = synthesize_potential(tg.g, a, l);
    auto w = tg.g.alpha_weights(a);
    auto src = tg.g.edge_sources();
    for (std::int64_t e = 0; e < tg.g.edge_count(); ++e)
        CHECK(pf.p[tg.g.heads[e]] - pf.p[src[e]] + w[e] >= 0);
    for (std::int32_t i = 0; i < cg.chain_count(); ++i)
        for (std::int32_t c : cg.chains[i]) CHECK(pf.p[c] == l.labels[i]);

    Labeling far{a, {0, 100}};
    CHECK_FALSE(labeling_feasible(cg, far));
    CHECK_THROWS_AS(synthesize_potential(tg.g, a, far), AnalysisError);
}

TEST_CASE("sections round-trip back to their labeling") {
    TransitionGraph tg = build_transition_graph(FlowSpec::builtin("slowed-vertical"),
                                                GridSpec{2, {32, 32, 1}}, BuildParams{});
    const Covector a = Covector::of(0, 1);
    AlphaChainGraph cg = build_chain_graph(tg.g, a);
    LabelingList lab = enumerate_labelings(cg, 3);
    REQUIRE(!lab.items.empty());
    for (const auto& l : lab.items) {
        PotentialField pf = synthesize_potential(tg.g, a, l);
        CrossSection sec = extract_section(tg.g, pf, default_level(pf, cg));
        Labeling back = section_to_labeling(tg.g, a, sec);
        CHECK(labelings_equal(l, back));
    }
}

TEST_CASE("level validity") {
    TransitionGraph tg = build_transition_graph(FlowSpec::builtin("constant"),
                                                GridSpec{2, {16, 16, 1}}, BuildParams{});
    const Covector a = Covector::of(0, 1);
    PotentialField pf = synthesize_potential(tg.g, a, Labeling{a, {}});
    CHECK_THROWS_AS(extract_section(tg.g, pf, 0.0), AnalysisError);
    CHECK_THROWS_AS(extract_section(tg.g, pf, 2.0), AnalysisError);
    CHECK_NOTHROW(extract_section(tg.g, pf, 0.25));
}

TEST_CASE("labelings compare up to a global constant") {
    const Covector a = Covector::of(0, 1);
    CHECK(labelings_equal(Labeling{a, {0, 2, 5}}, Labeling{a, {-1, 1, 4}}));
    CHECK_FALSE(labelings_equal(Labeling{a, {0, 2, 5}}, Labeling{a, {0, 2, 4}}));
    CHECK_THROWS_AS(labelings_equal(Labeling{a, {0}}, Labeling{a, {0, 1}}), AnalysisError);
}

TEST_CASE("cardinality of the zero class") {
    WeightedDigraph cyc = toy(2, {{0, 1, {0, 0, 0}}, {1, 0, {0, 1, 0}}});
    AlphaChainGraph cg = build_chain_graph(cyc, Covector::of(0, 0));
    CHECK_THROWS_AS(classify_cardinality(cg, Covector::of(0, 0), true), AnalysisError);
    WeightedDigraph tail = toy(3, {{0, 1, {0, 0, 0}}, {1, 0, {0, 1, 0}}, {0, 2, {0, 0, 0}},
                                   {2, 2, {0, 0, 0}}});
    AlphaChainGraph cg2 = build_chain_graph(tail, Covector::of(0, 0));
    Cardinality card = classify_cardinality(cg2, Covector::of(0, 0), false);
    CHECK(card.kind == CardinalityKind::countably_infinite);
}

TEST_CASE("order-incomparable chains make the family countably infinite") {
    // two zero-weight loops with no connection at all
    WeightedDigraph g = toy(2, {{0, 0, {1, 0, 0}}, {1, 1, {1, 0, 0}}});
    const Covector a = Covector::of(0, 1);
    AlphaChainGraph cg = build_chain_graph(g, a);
    REQUIRE(cg.chain_count() == 2);
    CHECK(cg.shifts[0][1] == AlphaChainGraph::SHIFT_INF);
    CHECK_FALSE(cg.transitive());
    Cardinality card = classify_cardinality(cg, a, false);
    CHECK(card.kind == CardinalityKind::countably_infinite);
    CHECK(card.reason.find("incomparable") != std::string::npos);
    LabelingList w2 = enumerate_labelings(cg, 2);
    CHECK(w2.truncated);
    CHECK(w2.items.size() == 5); // unconstrained second label clipped to [-2,2]
}

TEST_CASE("enumeration cap flags truncation instead of exhausting memory") {
    // 8 disconnected zero-weight loops: 17^7 window-8 labelings >> the cap
    std::vector<EdgeRec> edges;
    for (int i = 0; i < 8; ++i) edges.push_back({i, i, {1, 0, 0}});
    WeightedDigraph g = toy(8, std::move(edges));
    AlphaChainGraph cg = build_chain_graph(g, Covector::of(0, 1));
    REQUIRE(cg.chain_count() == 8);
    LabelingList lab = enumerate_labelings(cg, 8);
    CHECK(lab.truncated);
    CHECK(lab.items.size() == 50000);
    for (const auto& l : lab.items) CHECK(l.labels[0] == 0);
}

TEST_CASE("adding two sections chain-by-chain loses injectivity") {
    // loop at 0 of class (0,0); loops at 1 of classes (0,1) and (1,0);
    // connecting edges 0 -> 1 of class (1,1) and 1 -> 0 of class (0,0)
    WeightedDigraph g = toy(2, {{0, 0, {0, 0, 0}},
                                {1, 1, {0, 1, 0}},
                                {1, 1, {1, 0, 0}},
                                {0, 1, {1, 1, 0}},
                                {1, 0, {0, 0, 0}}});
    const Covector a1 = Covector::of(1, 0), a2 = Covector::of(0, 1);
    AlphaChainGraph cg1 = build_chain_graph(g, a1);
    AlphaChainGraph cg2 = build_chain_graph(g, a2);
    LabelingList l1 = enumerate_labelings(cg1);
    LabelingList l2 = enumerate_labelings(cg2);
    REQUIRE(l1.items.size() == 2);
    REQUIRE(l2.items.size() == 2);

    std::vector<FriedSumResult> sums;
    for (const auto& x : l1.items)
        for (const auto& y : l2.items) sums.push_back(fried_sum(g, a1, x, a2, y));
    for (const auto& r : sums) {
        CHECK(r.feasible);
        CHECK(r.sum.alpha == Covector::of(1, 1));
        REQUIRE(r.sum.labels.size() == 1); // the sum class has a single chain
        CHECK(labelings_equal(r.sum, sums[0].sum));
    }
    CHECK_THROWS_AS(fried_sum(g, a1, l1.items[0], Covector::of(-1, 0), l1.items[0]),
                    AnalysisError); // zero sum class
}

TEST_CASE("section SVG rendering emits a closed path document") {
    TransitionGraph tg = build_transition_graph(FlowSpec::builtin("slowed-vertical"),
                                                GridSpec{2, {32, 32, 1}}, BuildParams{});
    const Covector a = Covector::of(0, 1);
    AlphaChainGraph cg = build_chain_graph(tg.g, a);
    Labeling l{a, {0, 0}};
    PotentialField pf = synthesize_potential(tg.g, a, l);
    CrossSection sec = extract_section(tg.g, pf, default_level(pf, cg));
    assemble_polylines(tg, pf, sec);
    std::ostringstream svg;
    write_section_svg(svg, tg, cg.chains, sec);
    const std::string s = svg.str();
    CHECK(s.rfind("<svg", 0) == 0);
    CHECK(s.find("<path") != std::string::npos);
    CHECK(s.find("</svg>") != std::string::npos);
}
