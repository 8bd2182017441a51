#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "smcf/coupling.hpp"
#include "smcf/errors.hpp"
#include "smcf/exact.hpp"
#include "smcf/fkmodel.hpp"
#include "smcf/measures.hpp"
#include "smcf/rng.hpp"
#include "smcf/smc.hpp"
#include "stats.hpp"

using namespace smcf;

namespace {

ParticleSystem<int> make_system(std::vector<int> xs, int time = 0) {
  ParticleSystem<int> sys;
  sys.particles = std::move(xs);
  sys.time = time;
  return sys;
}

int count_ones(const std::vector<int>& xs) {
  int c = 0;
  for (const int x : xs) c += x;
  return c;
}

}  // namespace

TEST_CASE("scheme names round trip") {
  for (const CouplingScheme s : {CouplingScheme::individual,
                                 CouplingScheme::state,
                                 CouplingScheme::alternating}) {
    CHECK(parse_scheme(scheme_name(s)) == s);
  }
  CHECK(scheme_name(CouplingScheme::state) == "state");
  CHECK_THROWS_AS(parse_scheme("bogus"), ConstructionError);
}

TEST_CASE("conditional coupler gives exact conditional marginals") {
  // Fix x and check that y | x follows the conditional law of the maximal
  // coupling: y = x with probability min(1, nu(x)/mu(x)), otherwise the
  // normalized residual (nu - mu)_+.
  const DiscretePMF mu({0.5, 0.3, 0.2});
  const DiscretePMF nu({0.2, 0.3, 0.5});
  const PmfDist dmu{&mu};
  const PmfDist dnu{&nu};
  RandomStream rng(21);
  const int x = 0;  // nu(0)/mu(0) = 0.4 accept; residual mass sits at 2
  std::vector<std::int64_t> counts(3, 0);
  const std::int64_t reps = 100000;
  for (std::int64_t r = 0; r < reps; ++r) ++counts[cond_max_couple(x, dmu, dnu, rng)];
  // P(y=0) = 0.4; residual (nu-mu)_+ = (0, 0, 0.3) normalized -> all at 2.
  const std::vector<double> want{0.4, 0.0, 0.6};
  CHECK(testutil::chi_square_gof(counts, want, reps).pass);
  CHECK(counts[1] == 0);
}

TEST_CASE("conditional coupler marginal over random x is nu") {
  const DiscretePMF mu({0.15, 0.25, 0.4, 0.2});
  const DiscretePMF nu({0.4, 0.1, 0.2, 0.3});
  const PmfDist dmu{&mu};
  const PmfDist dnu{&nu};
  RandomStream rng(22);
  const std::int64_t reps = 200000;
  std::vector<std::int64_t> count_y(4, 0);
  std::int64_t mismatches = 0;
  for (std::int64_t r = 0; r < reps; ++r) {
    const int x = dmu.sample(rng);
    const int y = cond_max_couple(x, dmu, dnu, rng);
    ++count_y[y];
    if (x != y) ++mismatches;
  }
  CHECK(testutil::chi_square_gof(count_y, nu.probs(), reps).pass);
  const double tv = tv_distance(mu, nu);
  const double freq = static_cast<double>(mismatches) / reps;
  CHECK(std::abs(freq - tv) < 4.0 * std::sqrt(tv * (1.0 - tv) / reps));
}

TEST_CASE("conditional coupler on identical laws is the identity") {
  const DiscretePMF mu({0.3, 0.7});
  const PmfDist d{&mu};
  RandomStream rng(23);
  for (int r = 0; r < 1000; ++r) {
    const int x = d.sample(rng);
    CHECK(cond_max_couple(x, d, d, rng) == x);
  }
}

TEST_CASE("rejection loop cap raises") {
  const DiscretePMF mu({0.999, 0.001});
  const DiscretePMF nu({0.001, 0.999});
  const PmfDist dmu{&mu};
  const PmfDist dnu{&nu};
  // From x = 0 the accept probability is about 1e-3, so with a zero cap a
  // rejected accept test must throw immediately.
  RandomStream rng(24);
  bool threw = false;
  for (int r = 0; r < 200 && !threw; ++r) {
    try {
      (void)cond_max_couple(0, dmu, dnu, rng, 0);
    } catch (const NonterminationError&) {
      threw = true;
    }
  }
  CHECK(threw);
}

TEST_CASE("mixture adapter matches the exact mixture pmf") {
  const DiscreteFKModel m = binary_model(0.2, 0.4, 1.0, 2);
  const auto sys = make_system({1, 1, 0, 0, 0});
  const DiscretePMF pmf = mixture_predictive(m, sys);
  const MixtureDist<DiscreteFKModel> mix(m, sys);
  for (int s = 0; s < 2; ++s)
    CHECK(mix.log_density(s) ==
          doctest::Approx(std::log(pmf[s])).epsilon(1e-12));
  RandomStream rng(25);
  std::vector<std::int64_t> counts(2, 0);
  const std::int64_t reps = 50000;
  for (std::int64_t r = 0; r < reps; ++r) ++counts[mix.sample(rng)];
  CHECK(testutil::chi_square_gof(counts, pmf.probs(), reps).pass);
}

TEST_CASE("product adapters multiply densities") {
  const DiscretePMF pmf({0.25, 0.75});
  const PmfProductDist prod{&pmf, 3};
  const std::vector<int> xs{1, 0, 1};
  CHECK(prod.log_density(xs) ==
        doctest::Approx(std::log(0.75 * 0.25 * 0.75)).epsilon(1e-13));
  RandomStream rng(26);
  const std::vector<int> draw = prod.sample(rng);
  CHECK(draw.size() == 3);

  const PmfDist base{&pmf};
  const ProductDist<PmfDist> generic{&base, 3};
  CHECK(generic.log_density(xs) ==
        doctest::Approx(prod.log_density(xs)).epsilon(1e-13));
}

TEST_CASE("pair construction") {
  auto pair = make_coupled_pair(make_system({0, 1}), make_system({1, 0}));
  CHECK_FALSE(pair.coupled);
  CHECK_FALSE(pair.coupling_step.has_value());
  auto same = make_coupled_pair(make_system({1, 1}, 2), make_system({1, 1}, 2));
  CHECK(same.coupled);
  CHECK(same.coupling_step == 2);
  CHECK_THROWS_AS(make_coupled_pair(make_system({0}), make_system({0, 1})),
                  DimensionError);
  CHECK_THROWS_AS(
      make_coupled_pair(make_system({0}, 0), make_system({0}, 1)),
      ConstructionError);
}

TEST_CASE("coupled pairs stay together afterwards") {
  const DiscreteFKModel m = binary_model(0.3, 0.5, 1.0, 8);
  RandomStream rng(27);
  auto pair = make_coupled_pair(make_system({1, 0, 1}), make_system({1, 0, 1}));
  REQUIRE(pair.coupled);
  for (int k = 0; k < 5; ++k) {
    pair = (k % 2 == 0) ? coupled_step_individual(pair, m, rng)
                        : coupled_step_state(pair, m, rng);
    CHECK(pair.a.particles == pair.b.particles);
    CHECK(pair.coupling_step == 0);
  }
}

TEST_CASE("both schemes preserve the count-chain marginals") {
  // One coupled step from fixed unequal configurations: each side's count of
  // ones must follow its own exact count transition row.
  const DiscreteFKModel m = binary_model(0.2, 0.5, 1.0, 2);
  const int n = 6;
  const auto init_a = make_system(std::vector<int>{1, 1, 1, 1, 0, 0});
  const auto init_b = make_system(std::vector<int>(n, 0));
  const DiscretePMF row_a = count_transition_row(m, n, 4, 0);
  const DiscretePMF row_b = count_transition_row(m, n, 0, 0);
  for (const bool use_state : {false, true}) {
    RandomStream rng(use_state ? 28 : 29);
    std::vector<std::int64_t> counts_a(n + 1, 0);
    std::vector<std::int64_t> counts_b(n + 1, 0);
    const std::int64_t reps = 20000;
    for (std::int64_t r = 0; r < reps; ++r) {
      auto pair = make_coupled_pair(init_a, init_b);
      pair = use_state ? coupled_step_state(pair, m, rng)
                       : coupled_step_individual(pair, m, rng);
      ++counts_a[count_ones(pair.a.particles)];
      ++counts_b[count_ones(pair.b.particles)];
    }
    CHECK(testutil::chi_square_gof(counts_a, row_a.probs(), reps).pass);
    CHECK(testutil::chi_square_gof(counts_b, row_b.probs(), reps).pass);
  }
}

TEST_CASE("state scheme couples with the product-law success probability") {
  // One state-scheme step succeeds exactly when the conditional maximal
  // coupling of the two N-fold product mixtures returns the drawn vector, so
  // the success probability is 1 - TV(mu^N, nu^N). For two-state product
  // laws that TV is computable by summing binomial count differences.
  const DiscreteFKModel m = binary_model(0.15, 0.7, 1.0, 2);
  const int n = 10;
  const auto init_a = make_system(std::vector<int>{1, 1, 1, 1, 1, 1, 1, 0, 0, 0});
  const auto init_b = make_system(std::vector<int>(n, 0));
  const DiscretePMF mix_a = mixture_predictive(m, init_a);
  const DiscretePMF mix_b = mixture_predictive(m, init_b);
  // TV of the N-fold products over {0,1}^N grouped by count of ones.
  const std::vector<double> rows_a = binomial_pmf_row(n, mix_a[1]);
  const std::vector<double> rows_b = binomial_pmf_row(n, mix_b[1]);
  double tv_prod = 0.0;
  for (int c = 0; c <= n; ++c) tv_prod += std::abs(rows_a[c] - rows_b[c]);
  tv_prod /= 2.0;
  const double p_couple = 1.0 - tv_prod;

  RandomStream rng(30);
  const std::int64_t reps = 10000;
  std::int64_t coupled = 0;
  for (std::int64_t r = 0; r < reps; ++r) {
    auto pair = make_coupled_pair(init_a, init_b);
    pair = coupled_step_state(pair, m, rng);
    if (pair.coupled) ++coupled;
  }
  const double freq = static_cast<double>(coupled) / reps;
  CHECK(std::abs(freq - p_couple) <
        4.0 * std::sqrt(p_couple * (1.0 - p_couple) / reps));
}

TEST_CASE("coupling time from equal starts is zero") {
  const DiscreteFKModel m = binary_model(0.1, 1.0, 1.0, 10);
  RandomStream rng(31);
  const std::vector<int> init(4, 1);
  for (const CouplingScheme s : {CouplingScheme::individual,
                                 CouplingScheme::state,
                                 CouplingScheme::alternating}) {
    const CouplingTimeResult res = coupling_time(m, init, init, s, rng, 10);
    REQUIRE(res.sigma.has_value());
    CHECK(*res.sigma == 0);
    CHECK(res.steps_taken == 0);
  }
}

TEST_CASE("coupling time validation and timeouts") {
  const DiscreteFKModel m = binary_model(0.1, 1.0, 1.0, 5);
  RandomStream rng(32);
  const std::vector<int> a(4, 0);
  const std::vector<int> b(4, 1);
  CHECK_THROWS_AS(coupling_time(m, a, b, CouplingScheme::state, rng, 6),
                  ConstructionError);
  CHECK_THROWS_AS(
      coupling_time(m, a, std::vector<int>(3, 1), CouplingScheme::state, rng,
                    5),
      DimensionError);
  // A hard model with a tiny budget times out without throwing.
  const DiscreteFKModel hard = binary_model(0.01, 1.0, 1.0, 1);
  int timeouts = 0;
  for (int r = 0; r < 50; ++r) {
    const std::vector<int> big_a(64, 0);
    const std::vector<int> big_b(64, 1);
    const CouplingTimeResult res =
        coupling_time(hard, big_a, big_b, CouplingScheme::state, rng, 1);
    CHECK(res.steps_taken <= 1);
    if (!res.sigma.has_value()) ++timeouts;
  }
  CHECK(timeouts > 0);
}

TEST_CASE("coupling time distribution is scheme-sensible") {
  const DiscreteFKModel m = binary_model(0.1, 1.0, 1.0, 200);
  RandomStream rng(33);
  const std::vector<int> a(16, 0);
  const std::vector<int> b(16, 1);
  double sum_state = 0.0;
  double sum_ind = 0.0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const auto rs = coupling_time(m, a, b, CouplingScheme::state, rng, 200);
    const auto ri =
        coupling_time(m, a, b, CouplingScheme::individual, rng, 200);
    REQUIRE(rs.sigma.has_value());
    REQUIRE(ri.sigma.has_value());
    CHECK(*rs.sigma >= 1);
    sum_state += *rs.sigma;
    sum_ind += *ri.sigma;
  }
  // The individual scheme must wait for all N particles to merge at once,
  // so its mean coupling time is well above the state scheme's.
  CHECK(sum_ind / reps > sum_state / reps);
}

TEST_CASE("alternating scheme starts with the requested side") {
  // With max_steps = 1 the alternating scheme takes exactly one step:
  // a state step when alternating_state_first, else an individual step.
  // Its per-seed outcome therefore matches the pure scheme run frame by
  // frame on a fresh stream with the same seed.
  const DiscreteFKModel m = binary_model(0.1, 0.8, 1.0, 1);
  const std::vector<int> a(8, 0);
  const std::vector<int> b(8, 1);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    RandomStream r1(seed);
    RandomStream r2(seed);
    const auto alt =
        coupling_time(m, a, b, CouplingScheme::alternating, r1, 1, true);
    const auto pure = coupling_time(m, a, b, CouplingScheme::state, r2, 1);
    CHECK(alt.sigma.has_value() == pure.sigma.has_value());
  }
  int agreements = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    RandomStream r1(seed);
    RandomStream r2(seed);
    const auto alt =
        coupling_time(m, a, b, CouplingScheme::alternating, r1, 1, false);
    const auto pure = coupling_time(m, a, b, CouplingScheme::individual, r2, 1);
    if (alt.sigma.has_value() == pure.sigma.has_value()) ++agreements;
  }
  CHECK(agreements == 200);
}
