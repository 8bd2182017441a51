#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "smcf/rng.hpp"

namespace smcf {

// Probability mass function on the alphabet {0, ..., size()-1}.
// Construction normalizes; negative, non-finite or all-zero input throws.
class DiscretePMF {
 public:
  explicit DiscretePMF(std::vector<double> weights);

  static DiscretePMF delta(std::size_t point, std::size_t size);
  static DiscretePMF uniform(std::size_t size);
  // Two-point pmf with mass p_one on state 1.
  static DiscretePMF bernoulli(double p_one);

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t s) const noexcept { return p_[s]; }
  const std::vector<double>& probs() const noexcept { return p_; }

  // Inverse-CDF draw consuming a single uniform.
  std::size_t sample(RandomStream& rng) const;

  bool operator==(const DiscretePMF&) const = default;

 private:
  std::vector<double> p_;
};

// Total variation distance, i.e. half the L1 distance.
double tv_distance(const DiscretePMF& mu, const DiscretePMF& nu);

// Squared Hellinger distance 1 - sum_s sqrt(mu_s nu_s), in [0, 1].
double hellinger_sq(const DiscretePMF& mu, const DiscretePMF& nu);

// Squared Hellinger distance between n-fold products of marginals at
// squared Hellinger distance h2: 1 - (1 - h2)^n.
double hellinger_sq_product(double h2, int n);

// One draw (x, y) from the maximal coupling of (mu, nu): both marginals are
// exact and P(x != y) equals tv_distance(mu, nu).
std::pair<std::size_t, std::size_t> max_couple_discrete(const DiscretePMF& mu,
                                                        const DiscretePMF& nu,
                                                        RandomStream& rng);

// TV bound for product measures from component TVs: 1 - prod_i (1 - tv_i).
double product_tv_upper(std::span<const double> component_tvs);

// TV bound from squared Hellinger distance: sqrt(1 - (1 - h2)^2).
double lecam_tv_upper(double h2);

}  // namespace smcf
