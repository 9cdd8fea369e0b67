#include <benchmark/benchmark.h>

#include <random>

#include "zocr/knn.hpp"
#include "zocr/mlp.hpp"
#include "zocr/preprocess.hpp"
#include "zocr/synthcorpus.hpp"
#include "zocr/zoning.hpp"

using namespace zocr;

namespace {

FeatureTable random_table(std::size_t rows, int classes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    FeatureTable t;
    t.grid = {4, 4};
    for (int c = 0; c < classes; ++c) t.classes.push_back({c, "c" + std::to_string(c)});
    for (std::size_t i = 0; i < rows; ++i) {
        FeatureRow r{static_cast<int>(i % static_cast<std::size_t>(classes)), std::to_string(i), FeatureVector(16)};
        for (auto& v : r.features) v = u(rng);
        t.rows.push_back(std::move(r));
    }
    return t;
}

void BM_ZoneDensities(benchmark::State& state) {
    const auto img = preprocess_pipeline(gen_glyph(3, 0, SynthConfig{})).image;
    const GridSpec grid{static_cast<int>(state.range(0)), static_cast<int>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(zone_densities(img, grid));
}
BENCHMARK(BM_ZoneDensities)->Arg(4)->Arg(11);

void BM_PreprocessPipeline(benchmark::State& state) {
    const auto img = gen_glyph(7, 1, SynthConfig{});
    for (auto _ : state) benchmark::DoNotOptimize(preprocess_pipeline(img));
}
BENCHMARK(BM_PreprocessPipeline);

void BM_GenGlyph(benchmark::State& state) {
    SynthConfig cfg;
    int i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(gen_glyph(i % 44, i, cfg)), ++i;
}
BENCHMARK(BM_GenGlyph);

void BM_KnnPredict(benchmark::State& state) {
    const auto model = knn_fit(random_table(static_cast<std::size_t>(state.range(0)), 44, 1));
    const auto q = random_table(64, 44, 2);
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(knn_predict(model, q.rows[i++ % 64].features, 5));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KnnPredict)->Arg(500)->Arg(3000)->Complexity(benchmark::oN);

void BM_MlpEpoch(benchmark::State& state) {
    const auto t = random_table(static_cast<std::size_t>(state.range(0)), 44, 3);
    TrainHyperparams hp;
    hp.epochs = 1;
    auto m = mlp_init(hp.h1, hp.h2, hp.init_seed);
    for (auto _ : state) m = mlp_train(std::move(m), t, hp).model;
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpEpoch)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);

void BM_MlpBackprop(benchmark::State& state) {
    const auto m = mlp_init(32, 32, 1);
    const FeatureVector x(16, 0.3);
    for (auto _ : state) benchmark::DoNotOptimize(mlp_backprop(m, x, 5));
}
BENCHMARK(BM_MlpBackprop);

}  // namespace
BENCHMARK_MAIN();
