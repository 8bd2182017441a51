#include "smcf/oos.hpp"

#include <algorithm>

#include "smcf/errors.hpp"

namespace smcf {

DelayedMeasurementScenario make_oos_scenario(const DiscreteFKModel& base,
                                             std::vector<double> delayed_potential,
                                             int arrival_step, int n_particles,
                                             RandomStream& rng) {
  if (arrival_step < 1)
    throw ConstructionError("measurement must arrive after at least one step");
  if (arrival_step > base.horizon())
    throw ConstructionError("arrival step exceeds the model horizon");
  DelayedMeasurementScenario s{base, std::move(delayed_potential), arrival_step,
                               run_pf(base, n_particles, arrival_step, rng)};
  corrected_model(s);  // validates the factor early
  return s;
}

DiscreteFKModel corrected_model(const DelayedMeasurementScenario& scenario) {
  return scenario.base.with_rescaled_initial_potential(
      scenario.delayed_potential);
}

OosRunResult process_oos(const DelayedMeasurementScenario& scenario,
                         CouplingScheme scheme, RandomStream& rng,
                         bool alternating_state_first) {
  if (scenario.stored.size() !=
      static_cast<std::size_t>(scenario.arrival_step) + 1)
    throw ConstructionError("stored trajectory length does not match arrival");
  const DiscreteFKModel corrected = corrected_model(scenario);
  OosRunResult result;
  result.corrected.reserve(scenario.stored.size());
  result.corrected.push_back(scenario.stored.front());  // shared initial draw
  for (int t = 1; t <= scenario.arrival_step; ++t) {
    const ParticleSystem<int>& stored_prev =
        scenario.stored[static_cast<std::size_t>(t) - 1];
    const ParticleSystem<int>& stored_now =
        scenario.stored[static_cast<std::size_t>(t)];
    const ParticleSystem<int>& corrected_prev = result.corrected.back();
    const DiscretePMF mu_tilde = mixture_predictive(scenario.base, stored_prev);
    const DiscretePMF mu = mixture_predictive(corrected, corrected_prev);
    CouplingScheme step_scheme = scheme;
    if (scheme == CouplingScheme::alternating) {
      const bool odd_step = (t % 2) == 1;
      step_scheme = (odd_step == alternating_state_first)
                        ? CouplingScheme::state
                        : CouplingScheme::individual;
    }
    ParticleSystem<int> next;
    next.time = t;
    if (step_scheme == CouplingScheme::state) {
      const PmfProductDist stored_law{&mu_tilde, stored_now.count()};
      const PmfProductDist corrected_law{&mu, stored_now.count()};
      next.particles =
          cond_max_couple(stored_now.particles, stored_law, corrected_law, rng);
    } else {
      const PmfDist stored_law{&mu_tilde};
      const PmfDist corrected_law{&mu};
      next.particles.reserve(stored_now.particles.size());
      for (int x : stored_now.particles)
        next.particles.push_back(
            cond_max_couple(x, stored_law, corrected_law, rng));
    }
    const bool merged = next.particles == stored_now.particles;
    result.corrected.push_back(std::move(next));
    if (merged) {
      result.sigma = t;
      result.coupled = true;
      break;
    }
  }
  result.final_system =
      result.coupled ? scenario.stored.back() : result.corrected.back();
  return result;
}

OosDiagnostics coupling_diagnostic(std::span<const OosRunResult> runs,
                                   int n_particles, int delay) {
  if (delay < 1) throw ConstructionError("delay must be >= 1");
  OosDiagnostics d;
  d.n_particles = n_particles;
  d.delay = delay;
  d.replicates = static_cast<int>(runs.size());
  d.sigma_histogram.assign(static_cast<std::size_t>(delay) + 1, 0);
  std::vector<double> sigmas;
  for (const OosRunResult& r : runs) {
    if (!r.coupled) continue;
    ++d.coupled_count;
    const int s = *r.sigma;
    if (s < 0 || s > delay)
      throw ConstructionError("coupling step outside [0, delay]");
    ++d.sigma_histogram[static_cast<std::size_t>(s)];
    sigmas.push_back(static_cast<double>(s));
  }
  d.coupled_fraction =
      runs.empty() ? 0.0
                   : static_cast<double>(d.coupled_count) /
                         static_cast<double>(runs.size());
  if (!sigmas.empty()) {
    std::sort(sigmas.begin(), sigmas.end());
    const std::size_t m = sigmas.size();
    d.median_sigma = (m % 2 == 1)
                         ? sigmas[m / 2]
                         : 0.5 * (sigmas[m / 2 - 1] + sigmas[m / 2]);
  }
  return d;
}

std::optional<int> safe_maximum_delay(std::span<const int> delays,
                                      std::span<const double> fractions,
                                      double threshold) {
  if (delays.size() != fractions.size())
    throw DimensionError("delays and fractions must align");
  int last = 0;
  for (std::size_t i = 0; i < delays.size(); ++i) {
    if (i > 0 && delays[i] <= last)
      throw ConstructionError("delays must be strictly ascending");
    last = delays[i];
    if (fractions[i] >= threshold) return delays[i];
  }
  return std::nullopt;
}

}  // namespace smcf
