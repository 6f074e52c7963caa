#include <benchmark/benchmark.h>

#include "radreason/extractor_sim.hpp"
#include "radreason/synth.hpp"

using namespace radreason;

namespace {

const Ckg& graph() {
    static const Ckg g = [] {
        SynthParams p;
        p.n_characters = 1000;
        p.n_radicals = 50;
        p.min_radicals = p.max_radicals = 7;
        p.unique_multisets = true;
        p.seed = 20240601;
        return generate_synthetic_ckg(p);
    }();
    return g;
}

void BM_SimulatePredictions(benchmark::State& state) {
    const Ckg& g = graph();
    NoiseModel noise;
    std::uint64_t i = 0;
    for (auto _ : state) {
        auto s = simulate_predictions(g.characters()[i % g.num_characters()], g, noise, {1, i});
        benchmark::DoNotOptimize(s);
        ++i;
    }
}
BENCHMARK(BM_SimulatePredictions);

void BM_MonteCarlo(benchmark::State& state) {
    const Ckg& g = graph();
    const auto strategy = static_cast<Strategy>(state.range(0));
    McOptions opts;
    opts.threads = 1;
    for (auto _ : state) {
        auto est = run_monte_carlo(g, {}, 2000, strategy, 9, opts);
        benchmark::DoNotOptimize(est);
    }
    state.SetLabel(std::string(to_string(strategy)));
    state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_MonteCarlo)
    ->Arg(static_cast<int>(Strategy::hard_top1))
    ->Arg(static_cast<int>(Strategy::reason_full))
    ->Unit(benchmark::kMillisecond);

void BM_LayoutCharacter(benchmark::State& state) {
    const Ckg& g = graph();
    const auto templates = TemplateSet::defaults();
    std::uint64_t i = 0;
    for (auto _ : state) {
        StreamRng rng(1, i, kLayoutSubstream);
        auto boxes = layout_character(templates, g.characters()[i % g.num_characters()], kDefaultJitter, rng);
        benchmark::DoNotOptimize(boxes);
        ++i;
    }
}
BENCHMARK(BM_LayoutCharacter);

}  // namespace
