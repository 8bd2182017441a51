#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "smcf/measures.hpp"
#include "smcf/rng.hpp"

namespace smcf {

// Entrywise density bounds; for finite models the dominating measure is
// counting measure, so these are just matrix/potential entry bounds.
struct A1Bounds {
  double m_lo;
  double m_hi;
  double g_lo;
  double g_hi;
};

// Constants derived from A1Bounds (all for the L2 case, p = 2).
struct PaperConstants {
  double beta;         // ideal-filter contraction rate per step
  double c_lp2;        // Lp error constant of the plain filter
  double c_cpf_lp2;    // Lp error constant of the conditional filter
  double c_thm;        // forgetting-time slope constant
  double cprime_thm;   // population threshold constant
  double c_poc;        // propagation-of-chaos constant
  std::uint64_t n_min;  // smallest admissible N: floor(cprime_thm) + 1
  double eps_easy;     // small-N contraction rate (m_lo/m_hi)^2
  // Phase-transition slope 1/log((1-2e)^-2), defined for binary flip models.
  std::optional<double> delta_eps;
};

PaperConstants paper_constants(const A1Bounds& b,
                               std::optional<double> flip_eps = std::nullopt);

using TransitionMatrix = std::vector<std::vector<double>>;  // row-stochastic

// Finite-state Feynman-Kac model over {0, ..., S-1} supporting T steps:
// potentials G_0..G_{T-1} and transition kernels M_1..M_T. Potentials are
// strictly positive; rows must sum to one within 1e-12.
class DiscreteFKModel {
 public:
  using State = int;

  DiscreteFKModel(DiscretePMF initial, std::vector<TransitionMatrix> mutations,
                  std::vector<std::vector<double>> potentials);

  int state_count() const noexcept { return static_cast<int>(initial_.size()); }
  int horizon() const noexcept { return static_cast<int>(potentials_.size()); }

  const DiscretePMF& initial() const noexcept { return initial_; }
  // G_k, valid for 0 <= k < horizon().
  double potential(int k, State x) const;
  const std::vector<double>& potential_vec(int k) const;
  // M_k(x, y), valid for 1 <= k <= horizon().
  double mutation_density(int k, State x, State y) const;
  const TransitionMatrix& mutation_matrix(int k) const;

  State sample_initial(RandomStream& rng) const;
  State sample_mutation(int k, State x, RandomStream& rng) const;

  // Exact entrywise bounds over all steps.
  A1Bounds bounds() const;

  // Flip probability if every kernel is the symmetric binary flip matrix
  // [[1-e, e], [e, 1-e]]; nullopt otherwise.
  std::optional<double> flip_epsilon() const;

  // Copy of the model with the step-0 potential multiplied elementwise by
  // an extra likelihood factor.
  DiscreteFKModel with_rescaled_initial_potential(
      std::span<const double> factor) const;

 private:
  void check_time_potential(int k) const;
  void check_time_mutation(int k) const;

  DiscretePMF initial_;
  std::vector<TransitionMatrix> mutations_;            // mutations_[k-1] = M_k
  std::vector<std::vector<double>> potentials_;        // potentials_[k] = G_k
};

// Two-state model with flip probability eps in (0, 1/2), potential (g0, g1)
// at every step and initial law Bernoulli(initial_p1).
DiscreteFKModel binary_model(double eps, double g0, double g1, int horizon,
                             double initial_p1 = 0.5);

// Bayes update: mu(dx) G(x) / mu(G). Throws DegenerateWeightError when the
// normalizer vanishes.
DiscretePMF psi_update(const DiscretePMF& mu, std::span<const double> g);

// One ideal predictor step: psi_update followed by the transition kernel.
DiscretePMF phi_step(const DiscretePMF& mu, std::span<const double> g,
                     const TransitionMatrix& m);

// Ideal predictor at time k started from the model's initial law (k <= T).
DiscretePMF ideal_predictor(const DiscreteFKModel& model, int k);

struct IdealFlow {
  std::vector<DiscretePMF> eta;  // predictor at times 0..n
  std::vector<DiscretePMF> pi;   // filter at times 0..n
};

// Exact predictor/filter recursion up to time n (n < horizon, since the
// filter at time n consumes G_n).
IdealFlow ideal_recursion(const DiscreteFKModel& model, int n);

// TV between the two ideal predictor flows started from mu and nu after k
// steps of the model.
double ideal_contraction_tv(const DiscreteFKModel& model, int k,
                            const DiscretePMF& mu, const DiscretePMF& nu);

}  // namespace smcf
