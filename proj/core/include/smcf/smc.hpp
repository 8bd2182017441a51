#pragma once

#include <cassert>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <string>
#include <vector>

#include "smcf/errors.hpp"
#include "smcf/fkmodel.hpp"
#include "smcf/measures.hpp"
#include "smcf/rng.hpp"

namespace smcf {

// Minimal model interface the particle engine needs. States are opaque to
// the engine; densities are only consumed by the coupling layer.
template <class M>
concept FeynmanKacModel = requires(const M& m, const typename M::State& x,
                                   const typename M::State& y, int k,
                                   RandomStream& rng) {
  typename M::State;
  { m.horizon() } -> std::convertible_to<int>;
  { m.sample_initial(rng) } -> std::same_as<typename M::State>;
  { m.sample_mutation(k, x, rng) } -> std::same_as<typename M::State>;
  { m.potential(k, x) } -> std::convertible_to<double>;
  { m.mutation_density(k, x, y) } -> std::convertible_to<double>;
};

template <class State>
struct ParticleSystem {
  std::vector<State> particles;
  int time = 0;

  int count() const noexcept { return static_cast<int>(particles.size()); }
};

// Conditioning path x*_0, ..., x*_T for the conditional filter.
template <class State>
using ReferencePath = std::vector<State>;

namespace detail {

// Cumulative weights for inverse-CDF selection. Throws on all-zero or
// non-finite weights.
inline void check_weight_total(double total) {
  if (!std::isfinite(total) || total <= 0.0)
    throw DegenerateWeightError("selection weights sum to " +
                                std::to_string(total));
  assert(total >= 1e-300 && "selection weights dangerously close to zero");
}

// Index of the first cumulative entry exceeding u (binary search).
inline std::size_t select_index(const std::vector<double>& cumulative,
                                double u) {
  std::size_t lo = 0;
  std::size_t hi = cumulative.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (cumulative[mid] > u)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

}  // namespace detail

template <FeynmanKacModel M>
ParticleSystem<typename M::State> init_particles(const M& model,
                                                 int n_particles,
                                                 RandomStream& rng) {
  if (n_particles < 1) throw ConstructionError("need at least one particle");
  ParticleSystem<typename M::State> sys;
  sys.particles.reserve(static_cast<std::size_t>(n_particles));
  for (int i = 0; i < n_particles; ++i)
    sys.particles.push_back(model.sample_initial(rng));
  sys.time = 0;
  return sys;
}

// One multinomial selection/mutation step: ancestors are drawn by
// inverse-CDF search on the cumulative potential array (one uniform per
// draw), then every offspring mutates through M_{k+1}.
template <FeynmanKacModel M>
ParticleSystem<typename M::State> pf_step(
    const ParticleSystem<typename M::State>& sys, const M& model,
    RandomStream& rng) {
  const int k = sys.time;
  if (k + 1 > model.horizon())
    throw ConstructionError("filter step exceeds the model horizon");
  const std::size_t n = sys.particles.size();
  if (n == 0) throw ConstructionError("empty particle system");
  std::vector<double> cumulative(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += model.potential(k, sys.particles[i]);
    cumulative[i] = total;
  }
  detail::check_weight_total(total);
  std::vector<std::size_t> ancestors(n);
  for (std::size_t i = 0; i < n; ++i)
    ancestors[i] = detail::select_index(cumulative, rng.uniform() * total);
  ParticleSystem<typename M::State> next;
  next.particles.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    next.particles.push_back(
        model.sample_mutation(k + 1, sys.particles[ancestors[i]], rng));
  next.time = k + 1;
  return next;
}

// Full filter run; returns the systems at times 0..steps.
template <FeynmanKacModel M>
std::vector<ParticleSystem<typename M::State>> run_pf(const M& model,
                                                      int n_particles,
                                                      int steps,
                                                      RandomStream& rng) {
  if (steps < 0 || steps > model.horizon())
    throw ConstructionError("run length outside [0, horizon]");
  std::vector<ParticleSystem<typename M::State>> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(init_particles(model, n_particles, rng));
  for (int k = 0; k < steps; ++k) out.push_back(pf_step(out.back(), model, rng));
  return out;
}

// Plain particle average: empirical predictor applied to phi.
template <class State, class Phi>
double predictive_estimate(const ParticleSystem<State>& sys, Phi&& phi) {
  if (sys.particles.empty()) throw ConstructionError("empty particle system");
  double acc = 0.0;
  for (const State& x : sys.particles) acc += phi(x);
  return acc / static_cast<double>(sys.particles.size());
}

// Potential-weighted average: empirical filter applied to phi.
template <FeynmanKacModel M, class Phi>
double filter_estimate(const ParticleSystem<typename M::State>& sys,
                       const M& model, Phi&& phi) {
  if (sys.particles.empty()) throw ConstructionError("empty particle system");
  double num = 0.0;
  double den = 0.0;
  for (const auto& x : sys.particles) {
    const double g = model.potential(sys.time, x);
    num += g * phi(x);
    den += g;
  }
  detail::check_weight_total(den);
  return num / den;
}

// One conditional-filter step: the reference state joins the selection pool
// at index 0, offspring mutate as usual, and the output again holds only
// the N free particles.
template <FeynmanKacModel M>
ParticleSystem<typename M::State> cpf_step(
    const ParticleSystem<typename M::State>& sys, const M& model,
    const ReferencePath<typename M::State>& reference, RandomStream& rng) {
  const int k = sys.time;
  if (k + 1 > model.horizon())
    throw ConstructionError("filter step exceeds the model horizon");
  if (static_cast<std::size_t>(k) >= reference.size())
    throw ConstructionError("reference path too short for this step");
  const std::size_t n = sys.particles.size();
  if (n == 0) throw ConstructionError("empty particle system");
  std::vector<double> cumulative(n + 1);
  double total = model.potential(k, reference[static_cast<std::size_t>(k)]);
  cumulative[0] = total;
  for (std::size_t i = 0; i < n; ++i) {
    total += model.potential(k, sys.particles[i]);
    cumulative[i + 1] = total;
  }
  detail::check_weight_total(total);
  ParticleSystem<typename M::State> next;
  next.particles.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = detail::select_index(cumulative, rng.uniform() * total);
    const auto& parent = (a == 0)
                             ? reference[static_cast<std::size_t>(k)]
                             : sys.particles[a - 1];
    next.particles.push_back(model.sample_mutation(k + 1, parent, rng));
  }
  next.time = k + 1;
  return next;
}

// Conditional filter run against a fixed reference path (length >= steps+1).
template <FeynmanKacModel M>
std::vector<ParticleSystem<typename M::State>> run_cpf(
    const M& model, int n_particles,
    const ReferencePath<typename M::State>& reference, int steps,
    RandomStream& rng) {
  if (steps < 0 || steps > model.horizon())
    throw ConstructionError("run length outside [0, horizon]");
  if (reference.size() < static_cast<std::size_t>(steps) + 1)
    throw ConstructionError("reference path shorter than the run");
  std::vector<ParticleSystem<typename M::State>> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(init_particles(model, n_particles, rng));
  for (int k = 0; k < steps; ++k)
    out.push_back(cpf_step(out.back(), model, reference, rng));
  return out;
}

// Filter estimate of the conditional system: the reference state enters the
// weighted average as one extra atom.
template <FeynmanKacModel M, class Phi>
double cpf_filter_estimate(const ParticleSystem<typename M::State>& sys,
                           const M& model,
                           const ReferencePath<typename M::State>& reference,
                           Phi&& phi) {
  if (sys.particles.empty()) throw ConstructionError("empty particle system");
  if (static_cast<std::size_t>(sys.time) >= reference.size())
    throw ConstructionError("reference path too short for this time");
  const auto& star = reference[static_cast<std::size_t>(sys.time)];
  double num = 0.0;
  double den = 0.0;
  for (const auto& x : sys.particles) {
    const double g = model.potential(sys.time, x);
    num += g * phi(x);
    den += g;
  }
  const double gstar = model.potential(sys.time, star);
  num += gstar * phi(star);
  den += gstar;
  detail::check_weight_total(den);
  return num / den;
}

// Exact next-step mixture pmf of a discrete system: the law each offspring
// particle is drawn from in pf_step.
DiscretePMF mixture_predictive(const DiscreteFKModel& model,
                               const ParticleSystem<int>& sys);

static_assert(FeynmanKacModel<DiscreteFKModel>);

}  // namespace smcf
