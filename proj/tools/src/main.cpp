#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mvbismut/errors.hpp"
#include "mvbismut_cli/config.hpp"
#include "mvbismut_cli/runner.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool dump = false;
  bool quiet = false;
};

CLI::App* add_subcommand(CLI::App& app, const std::string& name, const std::string& help,
                         Flags& flags) {
  auto* sub = app.add_subcommand(name, help);
  sub->add_option("--config", flags.config, "Experiment configuration (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", flags.out, "Output directory (overrides output_dir)");
  sub->add_option("--seed", flags.seed, "Seed (overrides the config)");
  sub->add_option("--threads", flags.threads, "Worker threads, 0 = hardware concurrency")
      ->capture_default_str();
  sub->add_flag("--dump-trajectories", flags.dump,
                "Write replication 0 positions and tangents per time node");
  sub->add_flag("-q,--quiet", flags.quiet, "Suppress the summary on stdout");
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace mvb::cli;
  CLI::App app{"Monte Carlo intrinsic derivatives for McKean-Vlasov SDEs"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  Flags flags;
  auto* run = add_subcommand(app, "run", "Run the task named in the config", flags);
  auto* compare = add_subcommand(app, "compare", "Bismut vs finite differences", flags);
  auto* sweep = add_subcommand(app, "sweep", "Run a sweep task (a1_sweep, a2_check, tangent_check)",
                               flags);

  CLI11_PARSE(app, argc, argv);

  try {
    auto config = load_config(flags.config);
    if (compare->parsed()) config.task = Task::Compare;
    if (sweep->parsed() && !is_sweep(config.task))
      throw mvb::ConfigError("task", "sweep expects a1_sweep, a2_check or tangent_check, got " +
                                         to_string(config.task));
    (void)run;

    RunOptions options;
    if (!flags.out.empty()) options.out_dir = flags.out;
    if (app.get_subcommands().front()->count("--seed") > 0) options.seed = flags.seed;
    options.threads = flags.threads;
    options.dump_trajectories = flags.dump;
    options.quiet = flags.quiet;

    const auto outcome = run_experiment(apply_overrides(config, options), options);
    return outcome.exit_code;
  } catch (const mvb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitError;
  }
}
