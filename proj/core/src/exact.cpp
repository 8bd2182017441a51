#include "smcf/exact.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smcf/errors.hpp"

namespace smcf {

namespace {

// Entries below peak * kRowCutoff are dropped from a pmf row. The discarded
// mass per row is below 1e-22, far inside every tolerance used downstream.
constexpr double kRowCutoff = 1e-26;

struct RowWindow {
  int lo;
  int hi;
};

// Fills buf[lo..hi] with the Binomial(n, p) pmf, leaving the rest stale.
// lg_np1 must be lgamma(n + 1).
RowWindow binomial_row_window(int n, double p, double* buf, double lg_np1) {
  if (p <= 0.0) {
    buf[0] = 1.0;
    return {0, 0};
  }
  if (p >= 1.0) {
    buf[n] = 1.0;
    return {n, n};
  }
  int m = static_cast<int>((static_cast<double>(n) + 1.0) * p);
  m = std::clamp(m, 0, n);
  const double log_peak = lg_np1 - std::lgamma(m + 1.0) -
                          std::lgamma(n - m + 1.0) + m * std::log(p) +
                          (n - m) * std::log1p(-p);
  const double peak = std::exp(log_peak);
  const double cutoff = peak * kRowCutoff;
  buf[m] = peak;
  const double odds = p / (1.0 - p);
  RowWindow w{m, m};
  double v = peak;
  for (int c = m + 1; c <= n; ++c) {
    v *= odds * (n - c + 1) / c;
    if (v < cutoff) break;
    buf[c] = v;
    w.hi = c;
  }
  v = peak;
  for (int c = m - 1; c >= 0; --c) {
    v *= (c + 1) / (odds * (n - c));
    if (v < cutoff) break;
    buf[c] = v;
    w.lo = c;
  }
  return w;
}

void require_binary(const DiscreteFKModel& model) {
  if (model.state_count() != 2)
    throw ConstructionError("count-chain oracle needs a two-state model");
}

void renormalize(std::vector<double>& w) {
  double total = 0.0;
  for (double v : w) total += v;
  if (total <= 0.0) throw DegenerateWeightError("count law lost all mass");
  for (double& v : w) v /= total;
}

// Advances several count laws (sharing n and time) by one step, generating
// each transition row once.
void evolve_step_batch(std::span<std::vector<double>*> laws, int n,
                       const DiscreteFKModel& model, int time) {
  const std::size_t d = laws.size();
  const double lg_np1 = std::lgamma(n + 1.0);
  std::vector<double> row(static_cast<std::size_t>(n) + 1);
  std::vector<std::vector<double>> next(
      d, std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
  for (int c = 0; c <= n; ++c) {
    bool any = false;
    for (std::size_t i = 0; i < d; ++i)
      if ((*laws[i])[static_cast<std::size_t>(c)] > 0.0) any = true;
    if (!any) continue;
    const double p = binary_next_one_prob(model, time, n, c);
    const RowWindow win = binomial_row_window(n, p, row.data(), lg_np1);
    for (std::size_t i = 0; i < d; ++i) {
      const double mass = (*laws[i])[static_cast<std::size_t>(c)];
      if (mass <= 0.0) continue;
      double* out = next[i].data();
      const double* r = row.data();
      for (int cc = win.lo; cc <= win.hi; ++cc) out[cc] += mass * r[cc];
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    renormalize(next[i]);
    *laws[i] = std::move(next[i]);
  }
}

double half_l1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

}  // namespace

std::vector<double> binomial_pmf_row(int n, double p) {
  if (n < 0) throw ConstructionError("negative binomial size");
  if (!(p >= 0.0 && p <= 1.0))
    throw ConstructionError("binomial parameter outside [0, 1]");
  std::vector<double> row(static_cast<std::size_t>(n) + 1, 0.0);
  binomial_row_window(n, p, row.data(), std::lgamma(n + 1.0));
  return row;
}

CountChainDistribution::CountChainDistribution(int n_particles,
                                               std::vector<double> weights,
                                               int time)
    : n_(n_particles), time_(time), w_(std::move(weights)) {
  if (n_ < 1) throw ConstructionError("need at least one particle");
  if (time_ < 0) throw ConstructionError("negative time index");
  if (w_.size() != static_cast<std::size_t>(n_) + 1)
    throw DimensionError("count law needs n_particles + 1 weights");
  for (double v : w_)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ConstructionError("count weights must be finite and >= 0");
  renormalize(w_);
}

CountChainDistribution CountChainDistribution::point_mass(int n_particles,
                                                          int count,
                                                          int time) {
  if (count < 0 || count > n_particles)
    throw ConstructionError("count outside {0, ..., n_particles}");
  std::vector<double> w(static_cast<std::size_t>(n_particles) + 1, 0.0);
  w[static_cast<std::size_t>(count)] = 1.0;
  return CountChainDistribution(n_particles, std::move(w), time);
}

CountChainDistribution CountChainDistribution::binomial(int n_particles,
                                                        double p_one,
                                                        int time) {
  return CountChainDistribution(n_particles, binomial_pmf_row(n_particles, p_one),
                                time);
}

double CountChainDistribution::mean_fraction() const {
  double m = 0.0;
  for (std::size_t c = 0; c < w_.size(); ++c) m += w_[c] * static_cast<double>(c);
  return m / n_;
}

double CountChainDistribution::variance_fraction() const {
  const double m = mean_fraction();
  double v = 0.0;
  for (std::size_t c = 0; c < w_.size(); ++c) {
    const double x = static_cast<double>(c) / n_ - m;
    v += w_[c] * x * x;
  }
  return v;
}

double binary_next_one_prob(const DiscreteFKModel& model, int time, int n,
                            int c) {
  require_binary(model);
  if (n < 1) throw ConstructionError("need at least one particle");
  if (c < 0 || c > n) throw ConstructionError("count outside {0, ..., n}");
  const double w1 = static_cast<double>(c) * model.potential(time, 1);
  const double w0 = static_cast<double>(n - c) * model.potential(time, 0);
  const double frac1 = w1 / (w0 + w1);
  return (1.0 - frac1) * model.mutation_density(time + 1, 0, 1) +
         frac1 * model.mutation_density(time + 1, 1, 1);
}

DiscretePMF count_transition_row(const DiscreteFKModel& model, int n, int c,
                                 int time) {
  return DiscretePMF(binomial_pmf_row(n, binary_next_one_prob(model, time, n, c)));
}

CountChainDistribution evolve_counts(const CountChainDistribution& dist,
                                     const DiscreteFKModel& model) {
  require_binary(model);
  if (dist.time() + 1 > model.horizon())
    throw ConstructionError("count-chain step exceeds the model horizon");
  std::vector<double> w = dist.weights();
  std::vector<double>* ptr = &w;
  evolve_step_batch({&ptr, 1}, dist.particle_count(), model, dist.time());
  return CountChainDistribution(dist.particle_count(), std::move(w),
                                dist.time() + 1);
}

std::vector<double> exact_forgetting_tv_sweep(const DiscreteFKModel& model,
                                              int n, std::span<const int> ks) {
  require_binary(model);
  if (ks.empty()) return {};
  int kmax = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < 0) throw ConstructionError("negative step count");
    if (i > 0 && ks[i] <= ks[i - 1])
      throw ConstructionError("step counts must be strictly ascending");
    kmax = std::max(kmax, ks[i]);
  }
  if (kmax > model.horizon())
    throw ConstructionError("step count exceeds the model horizon");
  std::vector<double> zeros(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> ones(static_cast<std::size_t>(n) + 1, 0.0);
  zeros.front() = 1.0;
  ones.back() = 1.0;
  std::vector<double>* pair[2] = {&zeros, &ones};
  std::vector<double> out;
  out.reserve(ks.size());
  std::size_t next = 0;
  for (int k = 0; k <= kmax; ++k) {
    if (k > 0) evolve_step_batch({pair, 2}, n, model, k - 1);
    if (next < ks.size() && ks[next] == k) {
      out.push_back(half_l1(zeros, ones));
      ++next;
    }
  }
  return out;
}

double exact_forgetting_tv(const DiscreteFKModel& model, int n, int k) {
  const int ks[1] = {k};
  return exact_forgetting_tv_sweep(model, n, ks)[0];
}

CountMoments exact_moments(double eps, int n_particles, int steps) {
  if (!(eps > 0.0 && eps < 0.5))
    throw ConstructionError("flip probability outside (0, 1/2)");
  if (n_particles < 1) throw ConstructionError("need at least one particle");
  if (steps < 0) throw ConstructionError("negative step count");
  const double rho = 1.0 - 2.0 * eps;
  const double drift = 0.5 * std::pow(rho, steps);
  return CountMoments{0.5 + drift, 0.5 - drift,
                      1.0 / (4.0 * n_particles * (1.0 - rho * rho))};
}

std::vector<double> exact_poc_tv_sweep(const DiscreteFKModel& model, int n,
                                       std::span<const int> qs, int k) {
  require_binary(model);
  if (k < 0 || k > model.horizon())
    throw ConstructionError("time outside [0, horizon]");
  for (int q : qs)
    if (q < 1 || q > n)
      throw ConstructionError("marginal size outside {1, ..., n}");
  std::vector<double> out;
  out.reserve(qs.size());
  if (k == 0) {
    out.assign(qs.size(), 0.0);
    return out;
  }
  std::vector<double> w =
      CountChainDistribution::binomial(n, model.initial()[1]).weights();
  std::vector<double>* ptr = &w;
  for (int t = 0; t < k - 1; ++t) evolve_step_batch({&ptr, 1}, n, model, t);
  const double eta_one = ideal_predictor(model, k)[1];
  for (int q : qs) {
    const double lg_qp1 = std::lgamma(q + 1.0);
    std::vector<double> row(static_cast<std::size_t>(q) + 1);
    std::vector<double> mix(static_cast<std::size_t>(q) + 1, 0.0);
    for (int c = 0; c <= n; ++c) {
      const double mass = w[static_cast<std::size_t>(c)];
      if (mass <= 0.0) continue;
      const double p = binary_next_one_prob(model, k - 1, n, c);
      const RowWindow win = binomial_row_window(q, p, row.data(), lg_qp1);
      for (int s = win.lo; s <= win.hi; ++s)
        mix[static_cast<std::size_t>(s)] += mass * row[static_cast<std::size_t>(s)];
    }
    renormalize(mix);
    std::vector<double> prod = binomial_pmf_row(q, eta_one);
    renormalize(prod);
    out.push_back(half_l1(mix, prod));
  }
  return out;
}

double exact_poc_tv(const DiscreteFKModel& model, int n, int q, int k) {
  const int qs[1] = {q};
  return exact_poc_tv_sweep(model, n, qs, k)[0];
}

bool verify_small_n_bound(const DiscreteFKModel& model, int n, int k,
                          double tol) {
  const A1Bounds b = model.bounds();
  const double ratio = b.m_lo / b.m_hi;
  const double eps_easy = ratio * ratio;
  const double bound = std::pow(1.0 - std::pow(eps_easy, n), k);
  return exact_forgetting_tv(model, n, k) <= bound + tol;
}

bool monotone_bound_check(double b, std::span<const int> grid, double tol) {
  if (!(b > 0.0)) throw ConstructionError("bound constant must be positive");
  double prev = 2.0;  // above any possible f value
  int last = 0;
  for (int n : grid) {
    if (static_cast<double>(n) <= b)
      throw ConstructionError("grid point not above the bound constant");
    if (n <= last) throw ConstructionError("grid must be strictly ascending");
    last = n;
    const double f = std::sqrt(
        -std::expm1(2.0 * n * std::log1p(-b / static_cast<double>(n))));
    if (f > prev + tol) return false;
    prev = f;
  }
  return true;
}

}  // namespace smcf
