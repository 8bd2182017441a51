#include "smcf/coupling.hpp"

#include <algorithm>

namespace smcf {

std::string_view scheme_name(CouplingScheme s) {
  switch (s) {
    case CouplingScheme::individual: return "individual";
    case CouplingScheme::state: return "state";
    case CouplingScheme::alternating: return "alternating";
  }
  throw ConstructionError("unknown coupling scheme");
}

CouplingScheme parse_scheme(std::string_view name) {
  if (name == "individual") return CouplingScheme::individual;
  if (name == "state") return CouplingScheme::state;
  if (name == "alternating") return CouplingScheme::alternating;
  throw ConstructionError("unknown coupling scheme '" + std::string(name) +
                          "'");
}

CoupledFilterPair<int> coupled_step_individual(const CoupledFilterPair<int>& pair,
                                               const DiscreteFKModel& model,
                                               RandomStream& rng) {
  if (pair.coupled) {
    ParticleSystem<int> a = pf_step(pair.a, model, rng);
    return detail::advance_coupled(pair, a, a);
  }
  const DiscretePMF mu = mixture_predictive(model, pair.a);
  const DiscretePMF nu = mixture_predictive(model, pair.b);
  ParticleSystem<int> a;
  ParticleSystem<int> b;
  const std::size_t n = pair.a.particles.size();
  a.particles.reserve(n);
  b.particles.reserve(n);
  a.time = b.time = pair.a.time + 1;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [x, y] = max_couple_discrete(mu, nu, rng);
    a.particles.push_back(static_cast<int>(x));
    b.particles.push_back(static_cast<int>(y));
  }
  return detail::advance_coupled(pair, std::move(a), std::move(b));
}

CoupledFilterPair<int> coupled_step_state(const CoupledFilterPair<int>& pair,
                                          const DiscreteFKModel& model,
                                          RandomStream& rng) {
  if (pair.coupled) {
    ParticleSystem<int> a = pf_step(pair.a, model, rng);
    return detail::advance_coupled(pair, a, a);
  }
  const DiscretePMF mu = mixture_predictive(model, pair.a);
  const DiscretePMF nu = mixture_predictive(model, pair.b);
  const int n = pair.a.count();
  const PmfProductDist mu_n{&mu, n};
  const PmfProductDist nu_n{&nu, n};
  ParticleSystem<int> a{mu_n.sample(rng), pair.a.time + 1};
  ParticleSystem<int> b{cond_max_couple(a.particles, mu_n, nu_n, rng),
                        pair.a.time + 1};
  return detail::advance_coupled(pair, std::move(a), std::move(b));
}

CouplingTimeResult coupling_time(const DiscreteFKModel& model,
                                 const std::vector<int>& init_a,
                                 const std::vector<int>& init_b,
                                 CouplingScheme scheme, RandomStream& rng,
                                 int max_steps,
                                 bool alternating_state_first) {
  if (max_steps < 0) throw ConstructionError("negative step budget");
  if (max_steps > model.horizon())
    throw ConstructionError("step budget exceeds the model horizon");
  CoupledFilterPair<int> pair =
      make_coupled_pair(ParticleSystem<int>{init_a, 0},
                        ParticleSystem<int>{init_b, 0});
  CouplingTimeResult result;
  for (int t = 1; t <= max_steps && !pair.coupled; ++t) {
    CouplingScheme step_scheme = scheme;
    if (scheme == CouplingScheme::alternating) {
      const bool odd_step = (t % 2) == 1;
      step_scheme = (odd_step == alternating_state_first)
                        ? CouplingScheme::state
                        : CouplingScheme::individual;
    }
    pair = (step_scheme == CouplingScheme::state)
               ? coupled_step_state(pair, model, rng)
               : coupled_step_individual(pair, model, rng);
    result.steps_taken = t;
  }
  result.sigma = pair.coupling_step;
  return result;
}

}  // namespace smcf
