#include <benchmark/benchmark.h>

#include <vector>

#include "smcf/coupling.hpp"
#include "smcf/fkmodel.hpp"
#include "smcf/measures.hpp"
#include "smcf/rng.hpp"
#include "smcf/smc.hpp"

static void PfStep(benchmark::State &state) {
  const int n = static_cast<int>(state.range(0));
  const smcf::DiscreteFKModel m = smcf::binary_model(0.1, 0.5, 1.0, 2);
  smcf::RandomStream rng(1);
  const smcf::ParticleSystem<int> sys = smcf::init_particles(m, n, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(smcf::pf_step(sys, m, rng));
  }
}
BENCHMARK(PfStep)->Arg(256)->Arg(2048)->Arg(16384);

static void MaxCoupleDraw(benchmark::State &state) {
  const smcf::DiscretePMF mu({0.15, 0.25, 0.4, 0.2});
  const smcf::DiscretePMF nu({0.4, 0.1, 0.2, 0.3});
  smcf::RandomStream rng(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(smcf::max_couple_discrete(mu, nu, rng));
  }
}
BENCHMARK(MaxCoupleDraw);

static void CoupledStepState(benchmark::State &state) {
  const int n = static_cast<int>(state.range(0));
  const smcf::DiscreteFKModel m = smcf::binary_model(0.1, 1.0, 1.0, 2);
  smcf::ParticleSystem<int> a;
  a.particles = std::vector<int>(static_cast<std::size_t>(n), 1);
  smcf::ParticleSystem<int> b;
  b.particles = std::vector<int>(static_cast<std::size_t>(n), 0);
  const smcf::CoupledFilterPair<int> pair = smcf::make_coupled_pair(a, b);
  smcf::RandomStream rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(smcf::coupled_step_state(pair, m, rng));
  }
}
BENCHMARK(CoupledStepState)->Arg(256)->Arg(2048);

static void CoupledStepIndividual(benchmark::State &state) {
  const int n = static_cast<int>(state.range(0));
  const smcf::DiscreteFKModel m = smcf::binary_model(0.1, 1.0, 1.0, 2);
  smcf::ParticleSystem<int> a;
  a.particles = std::vector<int>(static_cast<std::size_t>(n), 1);
  smcf::ParticleSystem<int> b;
  b.particles = std::vector<int>(static_cast<std::size_t>(n), 0);
  const smcf::CoupledFilterPair<int> pair = smcf::make_coupled_pair(a, b);
  smcf::RandomStream rng(4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(smcf::coupled_step_individual(pair, m, rng));
  }
}
BENCHMARK(CoupledStepIndividual)->Arg(256)->Arg(2048);

static void CouplingTimeRun(benchmark::State &state) {
  const int n = static_cast<int>(state.range(0));
  const int max_steps = 200;
  const smcf::DiscreteFKModel m = smcf::binary_model(0.1, 1.0, 1.0, max_steps);
  const std::vector<int> ones(static_cast<std::size_t>(n), 1);
  const std::vector<int> zeros(static_cast<std::size_t>(n), 0);
  smcf::RandomStream rng(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(smcf::coupling_time(
        m, ones, zeros, smcf::CouplingScheme::state, rng, max_steps));
  }
}
BENCHMARK(CouplingTimeRun)->Arg(256)->Arg(1024);

BENCHMARK_MAIN();
