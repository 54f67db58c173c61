#include <benchmark/benchmark.h>

#include "forgesim/ars.hpp"
#include "forgesim/rng.hpp"

using namespace forgesim;

static void GateStream(benchmark::State& state) {
    ArsConfig cfg;
    Rng rng(1);
    std::vector<Rational> scores;
    scores.reserve(100000);
    for (int i = 0; i < 100000; ++i)
        scores.emplace_back(static_cast<std::int64_t>(rng.next_index(1000001)), 1000000);

    for (auto _ : state) {
        ArsGate gate(cfg);
        std::uint64_t accepted = 0;
        for (const auto& s : scores)
            if (gate.evaluate(s).decision == ArsDecision::Accept) ++accepted;
        benchmark::DoNotOptimize(accepted);
    }
    state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(GateStream)->Unit(benchmark::kMillisecond);

static void FuseScore(benchmark::State& state) {
    ArsConfig cfg;
    const Rational a(123456, 1000000);
    const Rational b(654321, 1000000);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fuse_score(a, b, cfg));
    }
}
BENCHMARK(FuseScore);

static void QuantileRecompute(benchmark::State& state) {
    Rng rng(2);
    std::vector<Rational> pool;
    for (std::int64_t i = 0; i < state.range(0); ++i)
        pool.emplace_back(static_cast<std::int64_t>(rng.next_index(1000001)), 1000000);
    const Rational q(1, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(quantile(pool, q));
    }
}
BENCHMARK(QuantileRecompute)->Arg(1000)->Arg(25000);

BENCHMARK_MAIN();
