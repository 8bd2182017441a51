#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "experiments.hpp"
#include "runner.hpp"

namespace {

struct CliArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
  double tamper_scale = 1.0;
};

void add_common(CLI::App* sub, CliArgs& args) {
  sub->add_option("--config", args.config_path, "TOML experiment config file")
      ->required();
  sub->add_option("--seed", args.seed, "override the [run] master_seed");
  sub->add_option("--threads", args.threads,
                  "worker threads (default: SMC_FORGET_THREADS, then the "
                  "config, then the hardware)");
  sub->add_option("--out", args.out_dir, "override the [output] directory");
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f)
    throw smcf::cli::ConfigError("cannot write output file '" + path.string() +
                                 "'");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace smcf::cli;

  CLI::App app{"Particle-filter forgetting, propagation-of-chaos and "
               "coupling-time experiments"};
  app.require_subcommand(1);
  CliArgs args;
  add_common(app.add_subcommand(
                 "forgetting", "exact filter-forgetting TV curves over (N, k)"),
             args);
  add_common(app.add_subcommand(
                 "poc", "exact propagation-of-chaos TV over (N, q, k)"),
             args);
  add_common(app.add_subcommand(
                 "lp-error", "Monte Carlo L2 errors of the plain and "
                             "conditional filters"),
             args);
  add_common(app.add_subcommand(
                 "coupling-time", "coupled-filter meeting-time statistics"),
             args);
  CLI::App* verify = app.add_subcommand(
      "verify-bounds", "check the analytic bounds against the exact oracle");
  add_common(verify, args);
  verify->add_option("--tamper-scale", args.tamper_scale, "")->group("");
  add_common(app.add_subcommand(
                 "oos-demo", "delayed-measurement correction diagnostics"),
             args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    ExperimentConfig cfg = load_config_file(args.config_path);
    if (args.seed) cfg.run.master_seed = *args.seed;
    if (args.out_dir) cfg.output.directory = *args.out_dir;
    const int threads = resolve_threads(
        args.threads, cfg.run.threads > 0 ? std::optional<int>(cfg.run.threads)
                                          : std::nullopt);

    CommandResult result;
    if (name == "forgetting")
      result = cmd_forgetting(cfg, threads);
    else if (name == "poc")
      result = cmd_poc(cfg, threads);
    else if (name == "lp-error")
      result = cmd_lp_error(cfg, threads);
    else if (name == "coupling-time")
      result = cmd_coupling_time(cfg, threads);
    else if (name == "verify-bounds")
      result = cmd_verify_bounds(cfg, threads, VerifyOptions{args.tamper_scale});
    else
      result = cmd_oos_demo(cfg, threads);

    const std::filesystem::path dir(cfg.output.directory);
    std::filesystem::create_directories(dir);
    if (!result.rows.empty()) {
      const std::string csv_name =
          cfg.output.csv_name.empty() ? name + ".csv" : cfg.output.csv_name;
      write_file(dir / csv_name, to_csv(result.rows));
    }
    for (const AuxFile& aux : result.aux) write_file(dir / aux.name, aux.content);
    std::fputs(result.report.c_str(), stdout);
    return result.ok ? 0 : 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
