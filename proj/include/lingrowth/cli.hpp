#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "lingrowth/ctsim.hpp"
#include "lingrowth/estimator.hpp"

namespace lingrowth::cli {

extern const char* const kVersion;

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kNumericalGuard = 2,
  kInconclusive = 3,
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  // site_op, bond_op, bcpp_lse, bcpp_dlse, weighted_bernoulli, table;
  // for ct also identity, doubling, branching, walk.
  std::string model = "site_op";
  double p = 0.6;
  double q = 0.5;
  double v = 1.5;
  int dim = 1;
  std::vector<Site> neighborhood;
  Orientation orientation = Orientation::kRow;
  UnitLaw table;

  double delta = 0.5;
  double epsilon = 0.0;
  std::vector<double> deltas{0.1, 0.25, 0.5};
  int m = 1;
  int horizon = 200;
  /// 20 * range when unset.
  std::optional<int> lookahead;
  int replicas = 20;
  std::uint64_t seed = 1;
  double tail = 0.5;
  bool log_mass = false;
  bool exact = false;
  Tolerances tolerances;

  std::string out = ".";
  int threads = 1;
};

/// Reads a JSON config. Syntax errors carry `path:line:column`.
ExperimentConfig load_config(const std::string& path);
/// Unknown keys and bad values throw ConfigError naming the key.
ExperimentConfig config_from_json(const nlohmann::json& j, const ExperimentConfig& base = {});
nlohmann::json to_json(const ExperimentConfig& c);

/// FNV-1a over the serialized config minus `out` and `threads`, which never
/// change an output byte (outputs echo the config without them too).
/// 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

void validate(const ExperimentConfig& c);
ModelSpec make_model(const ExperimentConfig& c);
CtKernel make_ct_kernel(const ExperimentConfig& c);
MassMode mass_mode(const ExperimentConfig& c);
int lookahead_of(const ExperimentConfig& c);

struct CommandResult {
  int exit_code = kOk;
  std::vector<std::string> files;
  std::string message;
};

/// `<out>/run_snapshots.csv` and `<out>/run_summary.json`.
CommandResult cmd_run(const ExperimentConfig& c);
/// `<out>/path_trace.csv` and `<out>/path_summary.json`.
CommandResult cmd_path(const ExperimentConfig& c);
/// `<out>/classify.json`; exit 3 when the verdict is borderline.
CommandResult cmd_classify(const ExperimentConfig& c);
/// `<out>/ct_snapshots.csv`, `<out>/ct_events.csv` and `<out>/ct_summary.json`.
CommandResult cmd_ct(const ExperimentConfig& c);
/// `<out>/oracle.json`: exact masses against path enumeration, n <= 12.
CommandResult cmd_oracle(const ExperimentConfig& c);

/// Runs `command` by name and maps exceptions to exit codes.
CommandResult dispatch(const std::string& command, const ExperimentConfig& c);

}  // namespace lingrowth::cli
