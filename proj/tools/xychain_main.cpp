#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "xychain/ensemble.hpp"
#include "xychain/runner.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string output_dir;
  int workers = 0;
  bool seed_given = false;
  std::uint64_t seed = 0;
};

void add_common_options(CLI::App* cmd, CliOptions& options) {
  cmd->add_option("--config", options.config_path, "Path to the run configuration")
      ->required();
  cmd->add_option("--out", options.output_dir, "Output directory");
  cmd->add_option("--workers", options.workers,
                  "Worker threads (default: XYCHAIN_WORKERS or hardware)");
  cmd->add_option("--seed", options.seed, "Override the configured base seed")
      ->each([&](const std::string&) { options.seed_given = true; });
}

xychain::RunSettings make_settings(const CliOptions& options,
                                   const std::string& command) {
  xychain::RunSettings settings;
  settings.config = xychain::load_config(options.config_path);
  settings.config_path = options.config_path;
  if (options.seed_given)
    settings.config.ensemble.disorder.base_seed = options.seed;
  settings.output_dir =
      options.output_dir.empty() ? ("out-" + command) : options.output_dir;
  settings.workers =
      options.workers > 0 ? options.workers : xychain::default_worker_count();
  return settings;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "xychain: free-fermion and exact-diagonalization laboratory for "
      "disordered XY spin chains"};
  app.require_subcommand(1);

  CliOptions options;
  bool negative_control = false;

  CLI::App* diag = app.add_subcommand(
      "diagonalize", "Per-realization mode spectra, gap and ground energy");
  CLI::App* dynloc = app.add_subcommand(
      "dynloc", "Disorder-averaged propagator correlator and decay fit");
  CLI::App* lr = app.add_subcommand(
      "lr", "Zero-velocity commutator sweep against the fitted envelope");
  CLI::App* cluster = app.add_subcommand(
      "cluster", "Per-realization clustering inequality check");
  CLI::App* gapstats = app.add_subcommand(
      "gap-stats", "Gap statistics and the Wegner-style linear bound");
  CLI::App* correlations = app.add_subcommand(
      "correlations", "Ground-state two-point decay sweep");
  CLI::App* verify = app.add_subcommand(
      "verify", "Cross-engine invariant suite (exit 3 on any breach)");
  verify->add_flag("--negative-control", negative_control,
                   "Corrupt one W column; the residual check must then fail");

  for (CLI::App* cmd : {diag, dynloc, lr, cluster, gapstats, correlations, verify})
    add_common_options(cmd, options);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const xychain::RunSettings settings = make_settings(options, command);
    if (command == "diagonalize") xychain::cmd_diagonalize(settings);
    else if (command == "dynloc") xychain::cmd_dynloc(settings);
    else if (command == "lr") xychain::cmd_lr(settings);
    else if (command == "cluster") xychain::cmd_cluster(settings);
    else if (command == "gap-stats") xychain::cmd_gapstats(settings);
    else if (command == "correlations") xychain::cmd_correlations(settings);
    else if (command == "verify") {
      if (!xychain::cmd_verify(settings, negative_control)) {
        std::fprintf(stderr, "verify: invariant suite failed\n");
        return 3;
      }
    }
    std::printf("wrote %s\n", settings.output_dir.string().c_str());
  } catch (const xychain::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const xychain::numerical_error& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
