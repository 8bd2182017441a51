#pragma once

#include <optional>
#include <span>
#include <vector>

#include "smcf/coupling.hpp"
#include "smcf/fkmodel.hpp"
#include "smcf/smc.hpp"

namespace smcf {

// A filter that ran to arrival_step before a measurement for time 0 showed
// up: the trajectory it produced, the model it used, and the late factor.
struct DelayedMeasurementScenario {
  DiscreteFKModel base;
  std::vector<double> delayed_potential;  // extra likelihood for time 0
  int arrival_step;                       // steps taken before arrival
  std::vector<ParticleSystem<int>> stored;  // systems at times 0..arrival_step
};

// Runs a fresh filter on base for arrival_step steps and packages it up.
DelayedMeasurementScenario make_oos_scenario(const DiscreteFKModel& base,
                                             std::vector<double> delayed_potential,
                                             int arrival_step, int n_particles,
                                             RandomStream& rng);

// The model the filter should have run: base with the step-0 potential
// multiplied by the late likelihood factor.
DiscreteFKModel corrected_model(const DelayedMeasurementScenario& scenario);

struct OosRunResult {
  // First time index at which the corrected vector equals the stored one.
  std::optional<int> sigma;
  bool coupled = false;
  // Corrected-filter systems at times 0..last simulated step.
  std::vector<ParticleSystem<int>> corrected;
  // Valid corrected-filter system at arrival_step: the stored suffix end if
  // the chains merged, otherwise the re-simulated terminal system.
  ParticleSystem<int> final_system;
};

// Retro-simulates the corrected filter conditionally on the stored
// trajectory, stopping as soon as the two particle vectors agree (from then
// on the stored suffix is itself a corrected-filter realization). Every
// simulated system is marginally exact for the corrected model whether or
// not the chains merge.
OosRunResult process_oos(const DelayedMeasurementScenario& scenario,
                         CouplingScheme scheme, RandomStream& rng,
                         bool alternating_state_first = true);

struct OosDiagnostics {
  int n_particles = 0;
  int delay = 0;
  int replicates = 0;
  int coupled_count = 0;
  double coupled_fraction = 0.0;
  std::optional<double> median_sigma;  // over coupled runs
  std::vector<int> sigma_histogram;    // bins 0..delay, zero bins included
};

// Per-(N, delay) summary of a batch of runs that share those parameters.
OosDiagnostics coupling_diagnostic(std::span<const OosRunResult> runs,
                                   int n_particles, int delay);

// Smallest delay whose coupling frequency reaches the threshold; delays and
// fractions are parallel arrays ordered by increasing delay.
std::optional<int> safe_maximum_delay(std::span<const int> delays,
                                      std::span<const double> fractions,
                                      double threshold = 0.99);

}  // namespace smcf
