#include <benchmark/benchmark.h>

#include <vector>

#include "refcmfs/baselines.hpp"
#include "refcmfs/metrics.hpp"
#include "refcmfs/refcmfs.hpp"
#include "refcmfs/rng.hpp"

using namespace refcmfs;

namespace {

DataMatrix gaussian_data(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n * d);
    for (double& x : v) x = rng.normal();
    return DataMatrix(n, d, std::move(v));
}

void BM_MembershipRow(benchmark::State& state) {
    const auto c = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    std::vector<double> h(c);
    for (double& v : h) v = rng.uniform(0.1, 10.0);
    for (auto _ : state) benchmark::DoNotOptimize(update_membership_row(h, 3, 1.1));
}
BENCHMARK(BM_MembershipRow)->Arg(5)->Arg(20)->Arg(100);

void BM_Iterations(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto data = gaussian_data(n, 32, 2);
    FitConfig cfg;
    cfg.cluster_count = 20;
    cfg.k_tilde = 3;
    cfg.init = baselines::random_sample_seed(data, 20, 3);
    for (auto _ : state) benchmark::DoNotOptimize(run_iterations(data, cfg, 5));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Iterations)->RangeMultiplier(2)->Range(2500, 20000)->Complexity(benchmark::oN)
    ->Unit(benchmark::kMillisecond);

void BM_Accuracy(benchmark::State& state) {
    const auto c = static_cast<std::size_t>(state.range(0));
    Rng rng(4);
    std::vector<int> pred(10000), truth(10000);
    for (auto& v : pred) v = static_cast<int>(rng.index(c));
    for (auto& v : truth) v = static_cast<int>(rng.index(c));
    for (auto _ : state) benchmark::DoNotOptimize(metrics::accuracy(pred, truth));
}
BENCHMARK(BM_Accuracy)->Arg(10)->Arg(100);

} // namespace

BENCHMARK_MAIN();
