#include "emkit/calendar.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace emkit::calendar;

namespace {

std::vector<CivilDateTime> instants(std::size_t n) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::int64_t> secs(-20'000'000'000LL, 20'000'000'000LL);
    std::vector<CivilDateTime> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(CivilDateTime::from_seconds(secs(rng)));
    return out;
}

void BM_AddOffset(benchmark::State& state) {
    const auto xs = instants(1024);
    const DateOffset off{.years = -432, .months = 7, .days = 19, .hours = 5};
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(add_offset(xs[i++ & 1023], off));
}
BENCHMARK(BM_AddOffset);

void BM_Diff(benchmark::State& state) {
    const auto xs = instants(1024);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(diff(xs[i & 1023], xs[(i + 1) & 1023]));
        ++i;
    }
}
BENCHMARK(BM_Diff);

void BM_FormatParse(benchmark::State& state) {
    const auto xs = instants(1024);
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(parse_timestamp(format_timestamp(xs[i++ & 1023])));
}
BENCHMARK(BM_FormatParse);

}  // namespace
