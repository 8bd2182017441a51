#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smcf/errors.hpp"
#include "smcf/fkmodel.hpp"
#include "smcf/measures.hpp"
#include "smcf/rng.hpp"
#include "smcf/smc.hpp"

namespace smcf {

enum class CouplingScheme { individual, state, alternating };

std::string_view scheme_name(CouplingScheme s);
CouplingScheme parse_scheme(std::string_view name);

inline constexpr std::int64_t kCouplingIterationCap = 10'000'000;

// A distribution the conditional coupler can use: log density plus sampling.
template <class D>
concept CouplableDist = requires(const D& d, const typename D::Value& v,
                                 RandomStream& rng) {
  typename D::Value;
  { d.log_density(v) } -> std::convertible_to<double>;
  { d.sample(rng) } -> std::same_as<typename D::Value>;
};

// Conditional maximal coupling: given x ~ mu, returns y ~ nu such that
// (x, y) is a maximal coupling of (mu, nu). Accepts x itself with
// probability min(1, nu(x)/mu(x)); otherwise proposes from nu until a
// proposal survives the residual test. Throws NonterminationError once the
// rejection loop exceeds iteration_cap.
template <CouplableDist Mu, CouplableDist Nu>
  requires std::same_as<typename Mu::Value, typename Nu::Value>
typename Mu::Value cond_max_couple(
    const typename Mu::Value& x, const Mu& mu, const Nu& nu, RandomStream& rng,
    std::int64_t iteration_cap = kCouplingIterationCap) {
  const double a = nu.log_density(x) - mu.log_density(x);
  if (a >= 0.0 || std::log(rng.uniform()) < a) return x;
  for (std::int64_t it = 0; it < iteration_cap; ++it) {
    typename Mu::Value y = nu.sample(rng);
    const double b = mu.log_density(y) - nu.log_density(y);
    // Keep y with probability 1 - min(1, mu(y)/nu(y)).
    if (b < 0.0 && std::log(rng.uniform()) >= b) return y;
  }
  throw NonterminationError("conditional coupling rejected " +
                            std::to_string(iteration_cap) + " proposals");
}

// Adapters for the conditional coupler.

struct PmfDist {
  using Value = int;
  const DiscretePMF* pmf;

  double log_density(int s) const {
    return std::log((*pmf)[static_cast<std::size_t>(s)]);
  }
  int sample(RandomStream& rng) const {
    return static_cast<int>(pmf->sample(rng));
  }
};

// n-fold product of one pmf over int vectors.
struct PmfProductDist {
  using Value = std::vector<int>;
  const DiscretePMF* pmf;
  int n;

  double log_density(const std::vector<int>& xs) const {
    double acc = 0.0;
    for (int x : xs) acc += std::log((*pmf)[static_cast<std::size_t>(x)]);
    return acc;
  }
  std::vector<int> sample(RandomStream& rng) const {
    std::vector<int> xs(static_cast<std::size_t>(n));
    for (auto& x : xs) x = static_cast<int>(pmf->sample(rng));
    return xs;
  }
};

// Next-step particle mixture of a generic model: density and sampler of the
// law each offspring is drawn from in pf_step. Density costs O(N).
template <FeynmanKacModel M>
struct MixtureDist {
  using Value = typename M::State;
  const M* model;
  const ParticleSystem<Value>* sys;
  std::vector<double> cumulative;
  double total = 0.0;

  MixtureDist(const M& m, const ParticleSystem<Value>& s)
      : model(&m), sys(&s), cumulative(s.particles.size()) {
    for (std::size_t i = 0; i < s.particles.size(); ++i) {
      total += m.potential(s.time, s.particles[i]);
      cumulative[i] = total;
    }
    detail::check_weight_total(total);
  }

  double log_density(const Value& y) const {
    double acc = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < sys->particles.size(); ++i) {
      const double w = cumulative[i] - prev;
      prev = cumulative[i];
      acc += w * model->mutation_density(sys->time + 1, sys->particles[i], y);
    }
    return std::log(acc / total);
  }

  Value sample(RandomStream& rng) const {
    const std::size_t a =
        detail::select_index(cumulative, rng.uniform() * total);
    return model->sample_mutation(sys->time + 1, sys->particles[a], rng);
  }
};

// n-fold product of any couplable distribution over vectors of its values.
template <CouplableDist D>
struct ProductDist {
  using Value = std::vector<typename D::Value>;
  const D* base;
  int n;

  double log_density(const Value& xs) const {
    double acc = 0.0;
    for (const auto& x : xs) acc += base->log_density(x);
    return acc;
  }
  Value sample(RandomStream& rng) const {
    Value xs;
    xs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) xs.push_back(base->sample(rng));
    return xs;
  }
};

// A pair of equally sized particle filters advanced under a coupling.
// coupling_step is the first time index at which the particle vectors
// agreed componentwise; from then on the pair moves with shared randomness.
template <class State>
struct CoupledFilterPair {
  ParticleSystem<State> a;
  ParticleSystem<State> b;
  bool coupled = false;
  std::optional<int> coupling_step;
};

template <class State>
CoupledFilterPair<State> make_coupled_pair(ParticleSystem<State> a,
                                           ParticleSystem<State> b) {
  if (a.particles.size() != b.particles.size())
    throw DimensionError("coupled filters need equal particle counts");
  if (a.time != b.time)
    throw ConstructionError("coupled filters need equal time indices");
  CoupledFilterPair<State> pair{std::move(a), std::move(b), false, {}};
  if (pair.a.particles == pair.b.particles) {
    pair.coupled = true;
    pair.coupling_step = pair.a.time;
  }
  return pair;
}

namespace detail {

template <class State>
CoupledFilterPair<State> advance_coupled(const CoupledFilterPair<State>& pair,
                                         ParticleSystem<State> a,
                                         ParticleSystem<State> b) {
  CoupledFilterPair<State> next{std::move(a), std::move(b), pair.coupled,
                                pair.coupling_step};
  if (!next.coupled && next.a.particles == next.b.particles) {
    next.coupled = true;
    next.coupling_step = next.a.time;
  }
  return next;
}

}  // namespace detail

// Individual scheme, exact-pmf version: every offspring pair is one draw
// from the maximal coupling of the two next-step mixtures. Once coupled,
// both sides advance through one shared pf_step.
CoupledFilterPair<int> coupled_step_individual(const CoupledFilterPair<int>& pair,
                                               const DiscreteFKModel& model,
                                               RandomStream& rng);

// State scheme, exact-pmf version: the a-side vector is drawn fresh and the
// b-side vector comes from the conditional maximal coupling of the two
// product laws (full product densities, evaluated in log space).
CoupledFilterPair<int> coupled_step_state(const CoupledFilterPair<int>& pair,
                                          const DiscreteFKModel& model,
                                          RandomStream& rng);

// Generic-model versions; mixture densities make these O(N^2) per step.
template <FeynmanKacModel M>
CoupledFilterPair<typename M::State> coupled_step_individual(
    const CoupledFilterPair<typename M::State>& pair, const M& model,
    RandomStream& rng) {
  using State = typename M::State;
  if (pair.coupled) {
    ParticleSystem<State> a = pf_step(pair.a, model, rng);
    return detail::advance_coupled(pair, a, a);
  }
  const MixtureDist<M> mu(model, pair.a);
  const MixtureDist<M> nu(model, pair.b);
  ParticleSystem<State> a;
  ParticleSystem<State> b;
  a.particles.reserve(pair.a.particles.size());
  b.particles.reserve(pair.a.particles.size());
  a.time = b.time = pair.a.time + 1;
  for (std::size_t i = 0; i < pair.a.particles.size(); ++i) {
    State x = mu.sample(rng);
    State y = cond_max_couple(x, mu, nu, rng);
    a.particles.push_back(std::move(x));
    b.particles.push_back(std::move(y));
  }
  return detail::advance_coupled(pair, std::move(a), std::move(b));
}

template <FeynmanKacModel M>
CoupledFilterPair<typename M::State> coupled_step_state(
    const CoupledFilterPair<typename M::State>& pair, const M& model,
    RandomStream& rng) {
  using State = typename M::State;
  if (pair.coupled) {
    ParticleSystem<State> a = pf_step(pair.a, model, rng);
    return detail::advance_coupled(pair, a, a);
  }
  const MixtureDist<M> mu(model, pair.a);
  const MixtureDist<M> nu(model, pair.b);
  const int n = pair.a.count();
  const ProductDist<MixtureDist<M>> mu_n{&mu, n};
  const ProductDist<MixtureDist<M>> nu_n{&nu, n};
  ParticleSystem<State> a{mu_n.sample(rng), pair.a.time + 1};
  ParticleSystem<State> b{cond_max_couple(a.particles, mu_n, nu_n, rng),
                          pair.a.time + 1};
  return detail::advance_coupled(pair, std::move(a), std::move(b));
}

struct CouplingTimeResult {
  std::optional<int> sigma;  // empty means the step budget ran out
  int steps_taken = 0;
};

// Runs a coupled pair from the two initial particle vectors until the
// vectors agree or max_steps is exhausted. A timeout is reported in the
// result, never thrown. The alternating scheme switches every step,
// starting with the state scheme unless alternating_state_first is false.
CouplingTimeResult coupling_time(const DiscreteFKModel& model,
                                 const std::vector<int>& init_a,
                                 const std::vector<int>& init_b,
                                 CouplingScheme scheme, RandomStream& rng,
                                 int max_steps = 10000,
                                 bool alternating_state_first = true);

}  // namespace smcf
