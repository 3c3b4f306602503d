// pagame: run, sweep and bounds front end.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pagame/commands.hpp"

namespace {

void add_common(CLI::App* cmd, pagame::CommandOptions& opt) {
  cmd->add_option("--config", opt.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
}

void add_experiment(CLI::App* cmd, pagame::CommandOptions& opt) {
  add_common(cmd, opt);
  cmd->add_option("--manifest", opt.manifest_path, "Replay the settings of a previous manifest.json")
      ->check(CLI::ExistingFile);
  cmd->add_option("--preset", opt.preset, "Reward model preset: table1_n5 | table1_n10");
  cmd->add_option("--model", opt.model_path, "JSON reward model {\"r0\": [...], \"theta0\": [...]}")
      ->check(CLI::ExistingFile);
  cmd->add_option("--jobs", opt.jobs, "Parallel episodes (0 = logical cores)")->capture_default_str();
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&opt](std::uint64_t s) { opt.seed = s; }, "Master seed (overrides the config)");
  cmd->add_option_function<std::string>(
         "--solver", [&opt](const std::string& s) { opt.solver = s; },
         "Estimator schedule: exact | hybrid | subgradient")
      ->check(CLI::IsMember({"exact", "hybrid", "subgradient"}));
  cmd->add_option_function<std::size_t>(
         "--refresh-every", [&opt](std::size_t k) { opt.refresh_every = k; },
         "Hybrid mode: exact solve on every K-th refresh")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--record-wallclock", opt.record_wallclock,
                "Fill the wallclock_s column (makes summaries run-dependent)");
  cmd->add_flag("!--no-traces", opt.write_traces, "Skip the per-replicate trace files");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Repeated principal-agent game simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pagame::kToolVersion);

  pagame::CommandOptions run_opt, sweep_opt, bounds_opt;

  auto* run = app.add_subcommand("run", "Run the replicates of one configuration");
  add_experiment(run, run_opt);

  auto* sweep = app.add_subcommand("sweep", "Run one experiment per horizon");
  add_experiment(sweep, sweep_opt);
  sweep->add_option("--T-list", sweep_opt.horizons, "Comma separated horizons, e.g. 1000,5000")
      ->delimiter(',');

  auto* bounds = app.add_subcommand("bounds", "Write the theoretical bound curves");
  add_common(bounds, bounds_opt);
  bounds->add_option("--alpha", bounds_opt.alpha, "Unspecified constant alpha of the bounds")
      ->capture_default_str();
  bounds->add_option("--radius", bounds_opt.radius, "Estimation radius beta")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pagame::exit_usage;
  }

  if (run->parsed()) return pagame::cmd_run(run_opt);
  if (sweep->parsed()) return pagame::cmd_sweep(sweep_opt);
  return pagame::cmd_bounds(bounds_opt);
}
