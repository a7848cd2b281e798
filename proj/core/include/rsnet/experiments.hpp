#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rsnet {

/// One command-line invocation, resolved: which study to run, the model
/// file, the numeric knobs and where artifacts land.
struct ExperimentSpec {
  std::string subcommand;
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  double tol = 1e-10;
  std::vector<int> n_values;  ///< empty: per-subcommand default
  std::size_t trials = 10000;
  std::size_t samples = 200;
  std::optional<double> c_override;
  bool stamp = false;  ///< timestamp comment in CSV headers (off: reruns
                       ///< with the same spec and seed are byte-identical)
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalFailure = 3;

/// Runs one experiment, writing CSV artifacts into spec.out_dir and a human
/// summary to log. Returns one of the kExit* codes.
int run_experiment(const ExperimentSpec& spec, std::ostream& log);

}  // namespace rsnet
