#include "smcf/measures.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smcf/errors.hpp"

namespace smcf {

namespace {

void check_same_alphabet(const DiscretePMF& mu, const DiscretePMF& nu) {
  if (mu.size() != nu.size())
    throw DimensionError("distributions live on different alphabets: " +
                         std::to_string(mu.size()) + " vs " +
                         std::to_string(nu.size()));
}

// Inverse-CDF index for target u in [0, total) over nonnegative weights.
std::size_t index_from_weights(std::span<const double> w, double u) {
  double acc = 0.0;
  std::size_t last_positive = 0;
  bool seen_positive = false;
  for (std::size_t s = 0; s < w.size(); ++s) {
    if (w[s] <= 0.0) continue;
    acc += w[s];
    last_positive = s;
    seen_positive = true;
    if (u < acc) return s;
  }
  // Rounding pushed u past the accumulated total; the last atom takes it.
  if (!seen_positive) throw DegenerateWeightError("no positive weight to sample");
  return last_positive;
}

}  // namespace

DiscretePMF::DiscretePMF(std::vector<double> weights) : p_(std::move(weights)) {
  if (p_.empty()) throw ConstructionError("empty weight vector");
  double total = 0.0;
  for (double w : p_) {
    if (!std::isfinite(w)) throw ConstructionError("non-finite weight");
    if (w < 0.0) throw ConstructionError("negative weight");
    total += w;
  }
  if (total <= 0.0) throw ConstructionError("weights sum to zero");
  for (double& w : p_) w /= total;
}

DiscretePMF DiscretePMF::delta(std::size_t point, std::size_t size) {
  if (point >= size) throw ConstructionError("delta point outside alphabet");
  std::vector<double> w(size, 0.0);
  w[point] = 1.0;
  return DiscretePMF(std::move(w));
}

DiscretePMF DiscretePMF::uniform(std::size_t size) {
  return DiscretePMF(std::vector<double>(size, 1.0));
}

DiscretePMF DiscretePMF::bernoulli(double p_one) {
  if (!(p_one >= 0.0 && p_one <= 1.0))
    throw ConstructionError("bernoulli parameter outside [0, 1]");
  return DiscretePMF({1.0 - p_one, p_one});
}

std::size_t DiscretePMF::sample(RandomStream& rng) const {
  return index_from_weights(p_, rng.uniform());
}

double tv_distance(const DiscretePMF& mu, const DiscretePMF& nu) {
  check_same_alphabet(mu, nu);
  double l1 = 0.0;
  for (std::size_t s = 0; s < mu.size(); ++s) l1 += std::abs(mu[s] - nu[s]);
  return 0.5 * l1;
}

double hellinger_sq(const DiscretePMF& mu, const DiscretePMF& nu) {
  check_same_alphabet(mu, nu);
  double affinity = 0.0;
  for (std::size_t s = 0; s < mu.size(); ++s)
    affinity += std::sqrt(mu[s] * nu[s]);
  return std::clamp(1.0 - affinity, 0.0, 1.0);
}

double hellinger_sq_product(double h2, int n) {
  if (!(h2 >= 0.0 && h2 <= 1.0))
    throw ConstructionError("squared Hellinger distance outside [0, 1]");
  if (n < 0) throw ConstructionError("negative product length");
  if (n == 0 || h2 == 0.0) return 0.0;
  if (h2 == 1.0) return 1.0;
  // 1 - (1 - h2)^n evaluated stably.
  return -std::expm1(static_cast<double>(n) * std::log1p(-h2));
}

std::pair<std::size_t, std::size_t> max_couple_discrete(const DiscretePMF& mu,
                                                        const DiscretePMF& nu,
                                                        RandomStream& rng) {
  check_same_alphabet(mu, nu);
  const std::size_t n = mu.size();
  std::vector<double> overlap(n);
  double omega = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    overlap[s] = std::min(mu[s], nu[s]);
    omega += overlap[s];
  }
  const double u = rng.uniform();
  if (u < omega) {
    const std::size_t s = index_from_weights(overlap, u);
    return {s, s};
  }
  // Residuals have disjoint supports, so the pair always mismatches here.
  std::vector<double> rmu(n), rnu(n);
  double rmass = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    rmu[s] = std::max(mu[s] - overlap[s], 0.0);
    rnu[s] = std::max(nu[s] - overlap[s], 0.0);
    rmass += rmu[s];
  }
  const std::size_t x = index_from_weights(rmu, rng.uniform() * rmass);
  const std::size_t y = index_from_weights(rnu, rng.uniform() * rmass);
  return {x, y};
}

double product_tv_upper(std::span<const double> component_tvs) {
  double keep = 1.0;
  for (double t : component_tvs) {
    if (!(t >= 0.0 && t <= 1.0))
      throw ConstructionError("component TV outside [0, 1]");
    keep *= 1.0 - t;
  }
  return 1.0 - keep;
}

double lecam_tv_upper(double h2) {
  if (!(h2 >= 0.0 && h2 <= 1.0))
    throw ConstructionError("squared Hellinger distance outside [0, 1]");
  const double keep = 1.0 - h2;
  return std::sqrt(std::max(0.0, 1.0 - keep * keep));
}

}  // namespace smcf
