#include "emkit/backends.hpp"
#include "emkit/eval.hpp"
#include "emkit/temporal_qa.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

using namespace emkit;

namespace {

void BM_TestEmbed(benchmark::State& state) {
    std::string text;
    for (int i = 0; i < state.range(0); ++i) text += "token" + std::to_string(i % 97) + ' ';
    for (auto _ : state) benchmark::DoNotOptimize(backends::test_embed(text));
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_TestEmbed)->Arg(16)->Arg(256)->Arg(4096);

void BM_Pearson(benchmark::State& state) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> d;
    std::vector<double> x(static_cast<std::size_t>(state.range(0))), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = d(rng);
        y[i] = x[i] + d(rng);
    }
    for (auto _ : state) benchmark::DoNotOptimize(eval::pearson(x, y));
}
BENCHMARK(BM_Pearson)->Arg(12)->Arg(1 << 16);

void BM_Grade(benchmark::State& state) {
    const auto items = temporal_qa::synthesize(temporal_qa::QAConfig::eval_preset(), 1);
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& it = items[i++ % items.size()];
        benchmark::DoNotOptimize(temporal_qa::grade(it.answer, it));
    }
}
BENCHMARK(BM_Grade);

void BM_SynthesizeEvalPreset(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(temporal_qa::synthesize(temporal_qa::QAConfig::eval_preset(), 1));
}
BENCHMARK(BM_SynthesizeEvalPreset);

}  // namespace
BENCHMARK_MAIN();
