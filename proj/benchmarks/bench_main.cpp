#include "finsler/berwald.hpp"
#include "finsler/funk_scan.hpp"
#include "finsler/holonomy_rank.hpp"
#include "finsler/metric.hpp"
#include "finsler/taylor_jet.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace finsler;

static void BM_JetMultiply(benchmark::State& state)
{
    const int nv = static_cast<int>(state.range(0));
    const int order = static_cast<int>(state.range(1));
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    const auto layout = JetLayout::get(nv, order);
    std::vector<double> a(layout->size()), b(layout->size());
    for (auto& v : a) v = u(rng);
    for (auto& v : b) v = u(rng);
    const TaylorJet ja(layout, a), jb(layout, b);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ja * jb);
    }
    state.counters["coeffs"] = static_cast<double>(layout->size());
}
BENCHMARK(BM_JetMultiply)->Args({4, 6})->Args({4, 11})->Args({6, 8})->Args({6, 11});

static void BM_FunkEnergyJet(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(0));
    std::vector<double> x(static_cast<std::size_t>(n), 0.1), y(static_cast<std::size_t>(n), 0.0);
    y[0] = 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(energy_jet(MetricSpec::funk(n), BasePoint{x, y}, 11));
    }
}
BENCHMARK(BM_FunkEnergyJet)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_BerwaldChain(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(0));
    std::vector<double> x(static_cast<std::size_t>(n), 0.1), y(static_cast<std::size_t>(n), 0.0);
    y[0] = 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(compute_berwald(MetricSpec::funk(n), BasePoint{x, y}, 11));
    }
}
BENCHMARK(BM_BerwaldChain)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_RankPipeline(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(0));
    std::vector<double> x(static_cast<std::size_t>(n), 0.0), y(static_cast<std::size_t>(n), 0.0);
    y[0] = 1.0;
    RankOptions opt;
    opt.b = static_cast<int>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(is_k_jet_generating(MetricSpec::funk(n), x, y, opt));
    }
}
BENCHMARK(BM_RankPipeline)->Args({2, 0})->Args({2, 1})->Args({3, 0})->Args({3, 1})->Unit(benchmark::kMillisecond);

static void BM_Scan(benchmark::State& state)
{
    ScanConfig cfg;
    cfg.t_grid = TGrid::parse("0:1:0.05");
    cfg.workers = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_scan(cfg));
    }
}
BENCHMARK(BM_Scan)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
