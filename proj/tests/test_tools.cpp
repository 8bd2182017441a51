#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "config.hpp"
#include "csv.hpp"
#include "doctest.h"
#include "fitting.hpp"
#include "runner.hpp"
#include "smcf/rng.hpp"
#include "toml_lite.hpp"

using namespace smcf::cli;

TEST_CASE("toml subset happy path") {
  const TomlTable t = parse_toml(
      "# leading comment\n"
      "[model]\n"
      "epsilon = 0.1          # trailing comment\n"
      "count = 1_000\n"
      "big = -42\n"
      "name = \"a # not a comment\"\n"
      "flag = true\n"
      "floats = [1.5, 2e-3, 3.0]\n"
      "\n"
      "[grid]\n"
      "N = [2, 4, 8,]\n");
  const TomlSection& model = t.at("model");
  CHECK(model.at("epsilon").as_double() == doctest::Approx(0.1));
  CHECK(model.at("count").as_int() == 1000);
  CHECK(model.at("big").as_int() == -42);
  CHECK(model.at("name").as_string() == "a # not a comment");
  CHECK(model.at("flag").as_bool());
  REQUIRE(model.at("floats").as_array().size() == 3);
  CHECK(model.at("floats").as_array()[1].as_double() ==
        doctest::Approx(2e-3));
  CHECK(t.at("grid").at("N").as_array().size() == 3);
  CHECK(model.at("epsilon").line == 3);
}

TEST_CASE("toml subset error cases") {
  CHECK_THROWS_AS(parse_toml("epsilon = 0.1\n"), ConfigError);  // no section
  CHECK_THROWS_AS(parse_toml("[a]\nx = 1\nx = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[a]\n[a]\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[a]\nx = \n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[a]\nx = 1 junk\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[a]\nx = \"unterminated\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[a]\nx = \"bad \\q escape\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[a]\nx = [1, 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[a\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[a]\nx = {1}\n"), ConfigError);
  // Type mismatches surface on access.
  const TomlTable t = parse_toml("[a]\nx = \"str\"\ny = 1.5\n");
  CHECK_THROWS_AS(t.at("a").at("x").as_int(), ConfigError);
  CHECK_THROWS_AS(t.at("a").at("y").as_int(), ConfigError);
  CHECK_THROWS_AS(t.at("a").at("x").as_array(), ConfigError);
  CHECK_THROWS_AS(parse_toml("[a]\nx = -1\n").at("a").at("x").as_uint(),
                  ConfigError);
}

TEST_CASE("config parsing fills defaults") {
  const ExperimentConfig cfg = parse_config_text(
      "[model]\n"
      "epsilon = 0.1\n");
  CHECK(cfg.model.g0 == 1.0);
  CHECK(cfg.model.g1 == 1.0);
  CHECK(cfg.model.initial[0] == doctest::Approx(0.5));
  CHECK(cfg.model.horizon == 0);
  CHECK(cfg.grid.n_list.empty());
  CHECK(cfg.grid.p_norm == 2);
  REQUIRE(cfg.grid.schemes.size() == 1);
  CHECK(cfg.grid.schemes[0] == smcf::CouplingScheme::state);
  CHECK(cfg.run.replicates == 100);
  CHECK(cfg.run.master_seed == 1);
  CHECK(cfg.run.threads == 0);
  CHECK(cfg.run.max_steps == 10000);
  CHECK(cfg.output.directory == ".");
  CHECK(cfg.output.csv_name.empty());
  CHECK_FALSE(cfg.scenario.present);
}

TEST_CASE("config parsing full document") {
  const ExperimentConfig cfg = parse_config_text(
      "[model]\n"
      "epsilon = 0.2\n"
      "g0 = 0.5\n"
      "g1 = 2.0\n"
      "initial = [1.0, 3.0]\n"
      "horizon = 12\n"
      "[grid]\n"
      "N = [16, 32]\n"
      "k = [0, 5, 10]\n"
      "q = [1, 2]\n"
      "p = 2\n"
      "schemes = [\"individual\", \"alternating\"]\n"
      "[run]\n"
      "replicates = 7\n"
      "master_seed = 99\n"
      "threads = 3\n"
      "max_steps = 50\n"
      "[output]\n"
      "directory = \"out\"\n"
      "csv = \"res.csv\"\n"
      "[scenario]\n"
      "g0_delayed = 0.1\n"
      "g1_delayed = 1.0\n"
      "delays = [1, 2, 4]\n");
  CHECK(cfg.model.epsilon == doctest::Approx(0.2));
  CHECK(cfg.model.initial[0] == doctest::Approx(0.25));
  CHECK(cfg.model.initial[1] == doctest::Approx(0.75));
  CHECK(cfg.model.horizon == 12);
  CHECK(cfg.grid.n_list == std::vector<int>{16, 32});
  CHECK(cfg.grid.k_list == std::vector<int>{0, 5, 10});
  CHECK(cfg.grid.q_list == std::vector<int>{1, 2});
  REQUIRE(cfg.grid.schemes.size() == 2);
  CHECK(cfg.grid.schemes[0] == smcf::CouplingScheme::individual);
  CHECK(cfg.grid.schemes[1] == smcf::CouplingScheme::alternating);
  CHECK(cfg.run.replicates == 7);
  CHECK(cfg.run.master_seed == 99);
  CHECK(cfg.run.threads == 3);
  CHECK(cfg.run.max_steps == 50);
  CHECK(cfg.output.directory == "out");
  CHECK(cfg.output.csv_name == "res.csv");
  CHECK(cfg.scenario.present);
  CHECK(cfg.scenario.g0_delayed == doctest::Approx(0.1));
  CHECK(cfg.scenario.delays == std::vector<int>{1, 2, 4});
}

TEST_CASE("config validation errors") {
  CHECK_THROWS_AS(parse_config_text("[grid]\nN = [2]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[model]\ng0 = 1.0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[model]\nepsilon = 0.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[model]\nepsilon = -0.1\n"), ConfigError);
  CHECK_THROWS_AS(
      parse_config_text("[model]\nepsilon = 0.1\ng0 = 0.0\n"), ConfigError);
  CHECK_THROWS_AS(
      parse_config_text("[model]\nepsilon = 0.1\ninitial = [1.0]\n"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_config_text("[model]\nepsilon = 0.1\n[grid]\np = 3\n"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_config_text("[model]\nepsilon = 0.1\n[grid]\nN = [4, 2]\n"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_config_text("[model]\nepsilon = 0.1\n[grid]\nN = [0]\n"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_config_text("[model]\nepsilon = 0.1\n[grid]\nschemes = [\"x\"]\n"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_config_text("[model]\nepsilon = 0.1\n[run]\nreplicates = 0\n"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_config_text("[model]\nepsilon = 0.1\n[bogus]\nx = 1\n"),
      ConfigError);
  // Unknown keys carry their line number.
  try {
    parse_config_text("[model]\nepsilon = 0.1\nwat = 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("wat") != std::string::npos);
  }
}

TEST_CASE("default marginal-size grid") {
  CHECK(default_q_grid(1) == std::vector<int>{1});
  CHECK(default_q_grid(8) == std::vector<int>{1, 2, 4, 8});
  CHECK(default_q_grid(6) == std::vector<int>{1, 2, 4, 6});
  CHECK(default_q_grid(7) == std::vector<int>{1, 2, 4, 7});
}

TEST_CASE("csv formatting") {
  CHECK(std::string(kCsvHeader) ==
        "experiment,epsilon,g0,g1,N,k,q,p,scheme,replicates,seed,value,"
        "stderr,bound");
  // Round-trip exactness of the value format.
  for (const double v : {0.1, 1.0 / 3.0, 1458.0, 2.2407100588622746e-3}) {
    const std::string s = format_value(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }

  ResultRecord full;
  full.experiment = "forgetting";
  full.epsilon = 0.1;
  full.g0 = 1.0;
  full.g1 = 1.0;
  full.n_particles = 4;
  full.k = 2;
  full.q = 1;
  full.p_norm = 2;
  full.scheme = smcf::CouplingScheme::state;
  full.replicates = 100;
  full.seed = 7;
  full.value = 0.5;
  full.std_error = 0.25;
  full.bound = 1.0;
  ResultRecord sparse;
  sparse.experiment = "poc";
  sparse.value = 0.125;
  const std::vector<ResultRecord> rows{full, sparse};
  const std::string text = to_csv(rows);
  CHECK(text ==
        std::string(kCsvHeader) + "\n" +
            "forgetting,0.10000000000000001,1,1,4,2,1,2,state,100,7,0.5,"
            "0.25,1\n"
            "poc,,,,,,,,,,,0.125,,\n");
  CHECK(text.find('\r') == std::string::npos);
}

TEST_CASE("line fit recovers exact lines") {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  const std::vector<double> y{3.5, 5.5, 7.5, 9.5};  // 1.5 + 2x
  const LineFit f = fit_line(x, y);
  CHECK(f.intercept == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));

  const std::vector<double> flat{2.0, 2.0, 2.0, 2.0};
  const LineFit g = fit_line(x, flat);
  CHECK(g.slope == doctest::Approx(0.0));
  CHECK(g.r2 == doctest::Approx(1.0));

  CHECK_THROWS_AS(fit_line(x, std::vector<double>{1.0}),
                  smcf::ConstructionError);
  CHECK_THROWS_AS(fit_line(std::vector<double>{1.0}, std::vector<double>{1.0}),
                  smcf::ConstructionError);
  CHECK_THROWS_AS(
      fit_line(std::vector<double>{2.0, 2.0}, std::vector<double>{1.0, 3.0}),
      smcf::ConstructionError);
}

TEST_CASE("quantiles and moments") {
  const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  CHECK(sample_quantile(v, 0.0) == doctest::Approx(1.0));
  CHECK(sample_quantile(v, 1.0) == doctest::Approx(4.0));
  CHECK(sample_quantile(v, 0.5) == doctest::Approx(2.5));
  CHECK(sample_quantile(v, 0.25) == doctest::Approx(1.75));
  CHECK(sample_quantile({5.0}, 0.9) == doctest::Approx(5.0));
  CHECK_THROWS_AS(sample_quantile({}, 0.5), smcf::ConstructionError);
  CHECK_THROWS_AS(sample_quantile(v, 1.5), smcf::ConstructionError);

  CHECK(sample_mean(v) == doctest::Approx(2.5));
  CHECK_THROWS_AS(sample_mean(std::vector<double>{}),
                  smcf::ConstructionError);
  CHECK(sample_sd(v) ==
        doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-12));
  CHECK(sample_sd(std::vector<double>{3.0}) == 0.0);
}

TEST_CASE("bootstrap standard error is deterministic and sane") {
  std::vector<double> v;
  smcf::RandomStream gen(50);
  for (int i = 0; i < 200; ++i) v.push_back(gen.uniform());
  smcf::RandomStream r1(51);
  smcf::RandomStream r2(51);
  const double a = bootstrap_quantile_se(v, 0.5, 200, r1);
  const double b = bootstrap_quantile_se(v, 0.5, 200, r2);
  CHECK(a == b);
  CHECK(a > 0.0);
  // Median SE of n uniforms is about 1/(2 sqrt(n) f) = 0.035; allow slack.
  CHECK(a < 0.2);
  CHECK_THROWS_AS(bootstrap_quantile_se(v, 0.5, 1, r1),
                  smcf::ConstructionError);
}

TEST_CASE("thread-count resolution precedence") {
  unsetenv("SMC_FORGET_THREADS");
  CHECK(resolve_threads(4, 2) == 4);
  CHECK(resolve_threads(std::nullopt, 2) == 2);
  CHECK(resolve_threads(std::nullopt, std::nullopt) >= 1);
  setenv("SMC_FORGET_THREADS", "3", 1);
  CHECK(resolve_threads(std::nullopt, 2) == 3);
  CHECK(resolve_threads(5, 2) == 5);  // flag beats env
  setenv("SMC_FORGET_THREADS", "junk", 1);
  CHECK_THROWS_AS(resolve_threads(std::nullopt, 2), ConfigError);
  setenv("SMC_FORGET_THREADS", "0", 1);
  CHECK_THROWS_AS(resolve_threads(std::nullopt, 2), ConfigError);
  unsetenv("SMC_FORGET_THREADS");
  CHECK_THROWS_AS(resolve_threads(0, std::nullopt), ConfigError);
  CHECK_THROWS_AS(resolve_threads(std::nullopt, -1), ConfigError);
}

TEST_CASE("parallel loop matches serial execution") {
  const std::size_t n = 1000;
  std::vector<double> serial(n), parallel(n);
  const auto task = [](std::size_t i) {
    smcf::RandomStream rng(smcf::replicate_seed(77, i));
    return rng.uniform() + static_cast<double>(i);
  };
  parallel_for(n, 1, [&](std::size_t i) { serial[i] = task(i); });
  parallel_for(n, 4, [&](std::size_t i) { parallel[i] = task(i); });
  CHECK(serial == parallel);

  std::atomic<int> ran{0};
  parallel_for(0, 4, [&](std::size_t) { ++ran; });
  CHECK(ran.load() == 0);

  CHECK_THROWS_AS(
      parallel_for(100, 4,
                   [](std::size_t i) {
                     if (i == 57) throw ConfigError("boom");
                   }),
      ConfigError);
}
