#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "smcf/exact.hpp"
#include "smcf/fkmodel.hpp"

static void BinomialRow(benchmark::State &state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(smcf::binomial_pmf_row(n, 0.37));
  }
}
BENCHMARK(BinomialRow)->Arg(256)->Arg(4096)->Arg(32768);

static void EvolveStep(benchmark::State &state) {
  const int n = static_cast<int>(state.range(0));
  const smcf::DiscreteFKModel m = smcf::binary_model(0.1, 1.0, 1.0, 2);
  const smcf::CountChainDistribution law =
      smcf::CountChainDistribution::binomial(n, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(smcf::evolve_counts(law, m));
  }
}
BENCHMARK(EvolveStep)->Arg(256)->Arg(4096);

static void ForgettingSweep(benchmark::State &state) {
  const int n = static_cast<int>(state.range(0));
  const double delta = 1.0 / std::log(1.0 / 0.64);
  const int kmax =
      static_cast<int>(std::floor(delta * std::log(static_cast<double>(n))));
  std::vector<int> ks;
  for (int k = 1; k <= kmax; ++k) ks.push_back(k);
  const smcf::DiscreteFKModel m = smcf::binary_model(0.1, 1.0, 1.0, kmax);
  for (auto _ : state) {
    benchmark::DoNotOptimize(smcf::exact_forgetting_tv_sweep(m, n, ks));
  }
}
BENCHMARK(ForgettingSweep)->Arg(1024)->Arg(8192);

static void PocTv(benchmark::State &state) {
  const int n = static_cast<int>(state.range(0));
  const smcf::DiscreteFKModel m = smcf::binary_model(0.1, 0.1, 1.0, 20);
  for (auto _ : state) {
    benchmark::DoNotOptimize(smcf::exact_poc_tv(m, n, 16, 20));
  }
}
BENCHMARK(PocTv)->Arg(256)->Arg(4096);

BENCHMARK_MAIN();
