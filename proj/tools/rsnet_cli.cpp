#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "rsnet/experiments.hpp"

namespace {

void add_common_options(CLI::App* cmd, rsnet::ExperimentSpec& spec) {
  cmd->add_option("--config", spec.config_path, "model + domain JSON file")->required();
  cmd->add_option("--out", spec.out_dir, "output directory for CSV artifacts");
  cmd->add_option("--seed", spec.seed, "base RNG seed");
  cmd->add_option("--workers", spec.workers, "worker threads (0 = hardware concurrency)");
  cmd->add_option("--tol", spec.tol, "value-iteration stopping tolerance (relative sup change)");
  cmd->add_option("--n", spec.n_values, "lattice scales, comma separated")->delimiter(',');
  cmd->add_option("--trials", spec.trials, "Monte Carlo trials per policy");
  cmd->add_option("--samples", spec.samples, "sample count for checks and scans");
  cmd->add_option("--c", spec.c_override, "override the risk parameter c from the config");
  cmd->add_flag("--stamp", spec.stamp, "timestamp comment in CSV headers");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"risk-sensitive escape-time control of re-entrant queueing networks"};
  app.require_subcommand(1);

  rsnet::ExperimentSpec spec;
  const struct {
    const char* name;
    const char* help;
  } subcommands[] = {
      {"validate", "check a model/domain config and report violations"},
      {"sp-check", "verify the reflection map on random piecewise-linear paths"},
      {"ham-check", "verify the Hamiltonian identity and the minimax exchange gap"},
      {"closed-form", "decay rates and subsolution scan for competing queues"},
      {"solve-dpe", "value iteration on the scaled lattice, one CSV per scale"},
      {"simulate", "Monte Carlo exit-time estimates under several policies"},
      {"converge", "lattice values against the closed form along a refinement"},
  };
  for (const auto& sc : subcommands) add_common_options(app.add_subcommand(sc.name, sc.help), spec);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rsnet::kExitConfigError;
  }

  spec.subcommand = app.get_subcommands().front()->get_name();
  return rsnet::run_experiment(spec, std::cout);
}
