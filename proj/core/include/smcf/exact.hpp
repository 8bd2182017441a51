#pragma once

#include <span>
#include <vector>

#include "smcf/fkmodel.hpp"
#include "smcf/measures.hpp"

namespace smcf {

// Binomial(n, p) pmf over {0, ..., n}, computed from a log-gamma anchor at
// the mode with a multiplicative recurrence outward. Row sums are within
// 1e-10 of one for n up to 8192.
std::vector<double> binomial_pmf_row(int n, double p);

// Law of the number of state-1 particles in a two-state N-particle filter.
class CountChainDistribution {
 public:
  CountChainDistribution(int n_particles, std::vector<double> weights,
                         int time = 0);
  static CountChainDistribution point_mass(int n_particles, int count,
                                           int time = 0);
  static CountChainDistribution binomial(int n_particles, double p_one,
                                         int time = 0);

  int particle_count() const noexcept { return n_; }
  int time() const noexcept { return time_; }
  const std::vector<double>& weights() const noexcept { return w_; }

  double mean_fraction() const;      // E[C/N]
  double variance_fraction() const;  // Var[C/N]

 private:
  int n_;
  int time_;
  std::vector<double> w_;
};

// Probability that one fresh particle lands in state 1 when c of the n
// current particles are ones (selection on G_time, mutation M_{time+1}).
double binary_next_one_prob(const DiscreteFKModel& model, int time, int n,
                            int c);

// One-row count transition: Binomial(n, binary_next_one_prob(...)).
DiscretePMF count_transition_row(const DiscreteFKModel& model, int n, int c,
                                 int time = 0);

// One exact step of the count chain; total mass is renormalized afterwards.
CountChainDistribution evolve_counts(const CountChainDistribution& dist,
                                     const DiscreteFKModel& model);

// TV after k steps between the count chains started from the all-zeros and
// all-ones particle configurations.
double exact_forgetting_tv(const DiscreteFKModel& model, int n, int k);
// Same, for several step counts in one evolution pass (ks ascending).
std::vector<double> exact_forgetting_tv_sweep(const DiscreteFKModel& model,
                                              int n, std::span<const int> ks);

struct CountMoments {
  double mean_ones_start;   // E[C_n/N] from the all-ones configuration
  double mean_zeros_start;  // E[C_n/N] from the all-zeros configuration
  double variance_upper;    // bound on Var[C_n/N], either start
};

// Closed-form count-fraction moments of the uniform-potential flip chain.
CountMoments exact_moments(double eps, int n_particles, int steps);

// TV between the law of the first q particles at time k and the q-fold
// product of the ideal predictor, both computed exactly via the count chain.
double exact_poc_tv(const DiscreteFKModel& model, int n, int q, int k);
std::vector<double> exact_poc_tv_sweep(const DiscreteFKModel& model, int n,
                                       std::span<const int> qs, int k);

// Checks exact_forgetting_tv(n, k) <= (1 - eps_easy^n)^k + tol with
// eps_easy = (m_lo/m_hi)^2 from the model's entrywise bounds.
bool verify_small_n_bound(const DiscreteFKModel& model, int n, int k,
                          double tol = 1e-12);

// Checks that f(N) = sqrt(1 - (1 - b/N)^(2N)) is nonincreasing over the
// ascending grid (every grid point must exceed b).
bool monotone_bound_check(double b, std::span<const int> grid,
                          double tol = 1e-12);

}  // namespace smcf
