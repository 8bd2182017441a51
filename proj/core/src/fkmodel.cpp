#include "smcf/fkmodel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smcf/errors.hpp"

namespace smcf {

namespace {
constexpr double kRowSumTol = 1e-12;
}

PaperConstants paper_constants(const A1Bounds& b,
                               std::optional<double> flip_eps) {
  if (!(b.m_lo > 0.0 && b.m_hi >= b.m_lo))
    throw ConstructionError("kernel bounds must satisfy 0 < m_lo <= m_hi");
  if (!(b.g_lo > 0.0 && b.g_hi >= b.g_lo))
    throw ConstructionError("potential bounds must satisfy 0 < g_lo <= g_hi");
  const double mr = b.m_hi / b.m_lo;  // >= 1
  const double gr = b.g_hi / b.g_lo;  // >= 1
  PaperConstants c{};
  c.beta = 1.0 - 1.0 / (mr * mr);
  c.c_lp2 = 2.0 * mr * mr * mr * gr;
  c.c_cpf_lp2 = 0.5 * gr + gr * gr * mr * mr * mr * 1.5;
  c.c_thm = (c.beta > 0.0 ? 1.0 / (2.0 * std::log(1.0 / c.beta))
                          : 0.0) +
            1.0 / std::log(2.0);
  const double mr8 = std::pow(mr, 8);
  const double gr4 = std::pow(gr, 4);
  c.cprime_thm = 4.5 * mr8 * gr4;
  c.c_poc = 0.5 * mr8 * gr4;
  c.n_min = static_cast<std::uint64_t>(std::floor(c.cprime_thm)) + 1;
  c.eps_easy = 1.0 / (mr * mr);
  if (flip_eps) {
    if (!(*flip_eps > 0.0 && *flip_eps < 0.5))
      throw ConstructionError("flip probability outside (0, 1/2)");
    c.delta_eps = -0.5 / std::log1p(-2.0 * *flip_eps);
  }
  return c;
}

DiscreteFKModel::DiscreteFKModel(DiscretePMF initial,
                                 std::vector<TransitionMatrix> mutations,
                                 std::vector<std::vector<double>> potentials)
    : initial_(std::move(initial)),
      mutations_(std::move(mutations)),
      potentials_(std::move(potentials)) {
  const std::size_t s = initial_.size();
  if (mutations_.empty() || mutations_.size() != potentials_.size())
    throw ConstructionError(
        "need one kernel and one potential per step, at least one step");
  for (const auto& m : mutations_) {
    if (m.size() != s) throw ConstructionError("kernel has wrong row count");
    for (const auto& row : m) {
      if (row.size() != s) throw ConstructionError("kernel row has wrong size");
      double total = 0.0;
      for (double p : row) {
        if (!(p >= 0.0) || !std::isfinite(p))
          throw ConstructionError("kernel entry must be finite and >= 0");
        total += p;
      }
      if (std::abs(total - 1.0) > kRowSumTol)
        throw ConstructionError("kernel row does not sum to one");
    }
  }
  for (const auto& g : potentials_) {
    if (g.size() != s) throw ConstructionError("potential has wrong size");
    for (double v : g)
      if (!(v > 0.0) || !std::isfinite(v))
        throw ConstructionError("potential must be finite and > 0");
  }
}

void DiscreteFKModel::check_time_potential(int k) const {
  if (k < 0 || k >= horizon())
    throw ConstructionError("potential index " + std::to_string(k) +
                            " outside [0, " + std::to_string(horizon() - 1) +
                            "]");
}

void DiscreteFKModel::check_time_mutation(int k) const {
  if (k < 1 || k > horizon())
    throw ConstructionError("kernel index " + std::to_string(k) +
                            " outside [1, " + std::to_string(horizon()) + "]");
}

double DiscreteFKModel::potential(int k, State x) const {
  check_time_potential(k);
  return potentials_[static_cast<std::size_t>(k)][static_cast<std::size_t>(x)];
}

const std::vector<double>& DiscreteFKModel::potential_vec(int k) const {
  check_time_potential(k);
  return potentials_[static_cast<std::size_t>(k)];
}

double DiscreteFKModel::mutation_density(int k, State x, State y) const {
  check_time_mutation(k);
  return mutations_[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(
      x)][static_cast<std::size_t>(y)];
}

const TransitionMatrix& DiscreteFKModel::mutation_matrix(int k) const {
  check_time_mutation(k);
  return mutations_[static_cast<std::size_t>(k - 1)];
}

DiscreteFKModel::State DiscreteFKModel::sample_initial(RandomStream& rng) const {
  return static_cast<State>(initial_.sample(rng));
}

DiscreteFKModel::State DiscreteFKModel::sample_mutation(int k, State x,
                                                        RandomStream& rng) const {
  const auto& row = mutation_matrix(k)[static_cast<std::size_t>(x)];
  const double u = rng.uniform();
  double acc = 0.0;
  int last = 0;
  for (std::size_t y = 0; y < row.size(); ++y) {
    if (row[y] <= 0.0) continue;
    acc += row[y];
    last = static_cast<int>(y);
    if (u < acc) return last;
  }
  return last;
}

A1Bounds DiscreteFKModel::bounds() const {
  A1Bounds b{1.0, 0.0, 0.0, 0.0};
  bool first = true;
  for (const auto& m : mutations_)
    for (const auto& row : m)
      for (double p : row) {
        if (first) {
          b.m_lo = b.m_hi = p;
          first = false;
        } else {
          b.m_lo = std::min(b.m_lo, p);
          b.m_hi = std::max(b.m_hi, p);
        }
      }
  b.g_lo = potentials_[0][0];
  b.g_hi = potentials_[0][0];
  for (const auto& g : potentials_)
    for (double v : g) {
      b.g_lo = std::min(b.g_lo, v);
      b.g_hi = std::max(b.g_hi, v);
    }
  return b;
}

std::optional<double> DiscreteFKModel::flip_epsilon() const {
  if (state_count() != 2) return std::nullopt;
  const double eps = mutations_[0][0][1];
  for (const auto& m : mutations_) {
    if (m[0][1] != eps || m[1][0] != eps || m[0][0] != 1.0 - eps ||
        m[1][1] != 1.0 - eps)
      return std::nullopt;
  }
  if (!(eps > 0.0 && eps < 0.5)) return std::nullopt;
  return eps;
}

DiscreteFKModel DiscreteFKModel::with_rescaled_initial_potential(
    std::span<const double> factor) const {
  if (factor.size() != static_cast<std::size_t>(state_count()))
    throw DimensionError("likelihood factor has wrong size");
  auto potentials = potentials_;
  for (std::size_t x = 0; x < factor.size(); ++x) {
    if (!(factor[x] > 0.0) || !std::isfinite(factor[x]))
      throw ConstructionError("likelihood factor must be finite and > 0");
    potentials[0][x] *= factor[x];
  }
  return DiscreteFKModel(initial_, mutations_, std::move(potentials));
}

DiscreteFKModel binary_model(double eps, double g0, double g1, int horizon,
                             double initial_p1) {
  if (!(eps > 0.0 && eps < 0.5))
    throw ConstructionError("flip probability outside (0, 1/2)");
  if (horizon < 1) throw ConstructionError("horizon must be >= 1");
  TransitionMatrix flip{{1.0 - eps, eps}, {eps, 1.0 - eps}};
  std::vector<double> g{g0, g1};
  return DiscreteFKModel(
      DiscretePMF::bernoulli(initial_p1),
      std::vector<TransitionMatrix>(static_cast<std::size_t>(horizon), flip),
      std::vector<std::vector<double>>(static_cast<std::size_t>(horizon), g));
}

DiscretePMF psi_update(const DiscretePMF& mu, std::span<const double> g) {
  if (g.size() != mu.size())
    throw DimensionError("potential has wrong size for this distribution");
  std::vector<double> w(mu.size());
  double total = 0.0;
  for (std::size_t s = 0; s < mu.size(); ++s) {
    if (!(g[s] >= 0.0) || !std::isfinite(g[s]))
      throw ConstructionError("potential must be finite and >= 0");
    w[s] = mu[s] * g[s];
    total += w[s];
  }
  if (total <= 0.0)
    throw DegenerateWeightError("Bayes update normalizer vanished");
  return DiscretePMF(std::move(w));
}

DiscretePMF phi_step(const DiscretePMF& mu, std::span<const double> g,
                     const TransitionMatrix& m) {
  const DiscretePMF selected = psi_update(mu, g);
  if (m.size() != mu.size())
    throw DimensionError("kernel has wrong size for this distribution");
  std::vector<double> next(mu.size(), 0.0);
  for (std::size_t x = 0; x < mu.size(); ++x) {
    if (m[x].size() != mu.size())
      throw DimensionError("kernel row has wrong size");
    for (std::size_t y = 0; y < mu.size(); ++y)
      next[y] += selected[x] * m[x][y];
  }
  return DiscretePMF(std::move(next));
}

DiscretePMF ideal_predictor(const DiscreteFKModel& model, int k) {
  if (k < 0 || k > model.horizon())
    throw ConstructionError("predictor time outside [0, horizon]");
  DiscretePMF eta = model.initial();
  for (int j = 1; j <= k; ++j)
    eta = phi_step(eta, model.potential_vec(j - 1), model.mutation_matrix(j));
  return eta;
}

IdealFlow ideal_recursion(const DiscreteFKModel& model, int n) {
  if (n < 0 || n >= model.horizon())
    throw ConstructionError(
        "filter recursion needs n < horizon (the filter at n consumes G_n)");
  IdealFlow flow;
  flow.eta.reserve(static_cast<std::size_t>(n) + 1);
  flow.pi.reserve(static_cast<std::size_t>(n) + 1);
  DiscretePMF eta = model.initial();
  for (int k = 0; k <= n; ++k) {
    if (k > 0)
      eta = phi_step(eta, model.potential_vec(k - 1), model.mutation_matrix(k));
    flow.eta.push_back(eta);
    flow.pi.push_back(psi_update(eta, model.potential_vec(k)));
  }
  return flow;
}

double ideal_contraction_tv(const DiscreteFKModel& model, int k,
                            const DiscretePMF& mu, const DiscretePMF& nu) {
  if (k < 0 || k > model.horizon())
    throw ConstructionError("contraction time outside [0, horizon]");
  DiscretePMF a = mu;
  DiscretePMF b = nu;
  for (int j = 1; j <= k; ++j) {
    a = phi_step(a, model.potential_vec(j - 1), model.mutation_matrix(j));
    b = phi_step(b, model.potential_vec(j - 1), model.mutation_matrix(j));
  }
  return tv_distance(a, b);
}

}  // namespace smcf
