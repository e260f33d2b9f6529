#include <benchmark/benchmark.h>

#include "torsec/alpha.hpp"
#include "torsec/cycle_mean.hpp"
#include "torsec/recurrence.hpp"
#include "torsec/sections.hpp"
#include "torsec/transition_graph.hpp"

using namespace torsec;

namespace {

TransitionGraph make(const std::string& name, int res) {
    return build_transition_graph(FlowSpec::builtin(name), GridSpec{2, {res, res, 1}},
                                  BuildParams{});
}

void BM_BuildTransitionGraph(benchmark::State& state) {
    const int res = static_cast<int>(state.range(0));
    for (auto _ : state) {
        TransitionGraph tg = make("reeb2d", res);
        benchmark::DoNotOptimize(tg.g.edge_count());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(res) * res);
}
BENCHMARK(BM_BuildTransitionGraph)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_ChainDecomposition(benchmark::State& state) {
    TransitionGraph tg = make("slowed-vertical", static_cast<int>(state.range(0)));
    for (auto _ : state) {
        ChainDecomposition cd = chain_decomposition(tg.g);
        benchmark::DoNotOptimize(cd.chain_count());
    }
}
BENCHMARK(BM_ChainDecomposition)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_BellmanPotentials(benchmark::State& state) {
    TransitionGraph tg = make("reeb2d", static_cast<int>(state.range(0)));
    const auto w = tg.g.alpha_weights(Covector::of(0, 1));
    for (auto _ : state) {
        BellmanResult r = bellman_potentials(tg.g, w);
        benchmark::DoNotOptimize(r.has_negative_cycle);
    }
}
BENCHMARK(BM_BellmanPotentials)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_MinCycleMean(benchmark::State& state) {
    TransitionGraph tg = make("psi1", static_cast<int>(state.range(0)));
    const auto w = tg.g.alpha_weights(Covector::of(1, 0));
    for (auto _ : state) {
        auto m = min_cycle_mean(tg.g, w);
        benchmark::DoNotOptimize(m);
    }
}
BENCHMARK(BM_MinCycleMean)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_ExtractSection(benchmark::State& state) {
    TransitionGraph tg = make("reeb2d", static_cast<int>(state.range(0)));
    const Covector a = Covector::of(0, 1);
    AlphaChainGraph cg = build_chain_graph(tg.g, a);
    PotentialField pf = synthesize_potential(tg.g, a, Labeling{a, {}});
    const double t = default_level(pf, cg);
    for (auto _ : state) {
        CrossSection sec = extract_section(tg.g, pf, t);
        benchmark::DoNotOptimize(sec.total_crossings);
    }
}
BENCHMARK(BM_ExtractSection)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
