#include "smcf/smc.hpp"

namespace smcf {

DiscretePMF mixture_predictive(const DiscreteFKModel& model,
                               const ParticleSystem<int>& sys) {
  const int k = sys.time;
  if (k + 1 > model.horizon())
    throw ConstructionError("mixture step exceeds the model horizon");
  if (sys.particles.empty()) throw ConstructionError("empty particle system");
  const std::size_t s = static_cast<std::size_t>(model.state_count());
  std::vector<double> weight(s, 0.0);
  for (int x : sys.particles) {
    if (x < 0 || static_cast<std::size_t>(x) >= s)
      throw ConstructionError("particle outside the state space");
    weight[static_cast<std::size_t>(x)] += model.potential(k, x);
  }
  double total = 0.0;
  for (double w : weight) total += w;
  detail::check_weight_total(total);
  const TransitionMatrix& m = model.mutation_matrix(k + 1);
  std::vector<double> next(s, 0.0);
  for (std::size_t x = 0; x < s; ++x) {
    if (weight[x] <= 0.0) continue;
    const double wx = weight[x] / total;
    for (std::size_t y = 0; y < s; ++y) next[y] += wx * m[x][y];
  }
  return DiscretePMF(std::move(next));
}

}  // namespace smcf
