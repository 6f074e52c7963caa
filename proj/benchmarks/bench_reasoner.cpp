#include <benchmark/benchmark.h>

#include "radreason/extractor_sim.hpp"
#include "radreason/reasoner.hpp"
#include "radreason/softlabel.hpp"
#include "radreason/synth.hpp"

using namespace radreason;

namespace {

// Graph plus one noisy prediction set per character length.
struct Workload {
    Ckg ckg;
    PredictionSet preds;
};

Workload make_workload(std::size_t radicals_per_char) {
    SynthParams p;
    p.n_characters = 2000;
    p.n_radicals = 200;
    p.min_radicals = p.max_radicals = radicals_per_char;
    p.seed = 1;
    Workload w{generate_synthetic_ckg(p), {}};
    NoiseModel noise;
    noise.r = noise.s = 0.8;
    w.preds = simulate_predictions(w.ckg.characters()[0], w.ckg, noise, {3, 0}).predictions;
    return w;
}

void BM_EnumerateRankTuples(benchmark::State& state) {
    const auto w = make_workload(static_cast<std::size_t>(state.range(0)));
    const auto cap = static_cast<std::size_t>(state.range(1));
    for (auto _ : state) {
        auto e = enumerate_rank_tuples(w.preds.detections, 5, cap);
        benchmark::DoNotOptimize(e);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cap));
}
BENCHMARK(BM_EnumerateRankTuples)->Args({2, 25})->Args({4, 625})->Args({7, 1000})->Args({7, 10000});

void BM_CharReason(benchmark::State& state) {
    const auto w = make_workload(static_cast<std::size_t>(state.range(0)));
    ReasonerParams params;
    params.cap = static_cast<std::size_t>(state.range(1));
    for (auto _ : state) {
        auto r = char_reason(w.ckg, w.preds, params);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_CharReason)->Args({2, 1000})->Args({4, 1000})->Args({7, 1000})->Args({7, 10000});

void BM_CharReasonSubset(benchmark::State& state) {
    const auto w = make_workload(3);
    ReasonerParams params;
    params.match_mode = MatchMode::subset;
    params.top_k = 3;
    for (auto _ : state) {
        auto r = char_reason(w.ckg, w.preds, params);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_CharReasonSubset);

void BM_BruteForce(benchmark::State& state) {
    SynthParams p;
    p.n_characters = 300;
    p.n_radicals = 10;
    p.min_radicals = p.max_radicals = static_cast<std::size_t>(state.range(0));
    p.seed = 2;
    const Ckg g = generate_synthetic_ckg(p);
    const auto preds = simulate_predictions(g.characters()[0], g, {}, {4, 0}).predictions;
    for (auto _ : state) {
        auto r = brute_force_reason(g, preds, 0.7);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_BruteForce)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace
