#pragma once

// Monte Carlo estimates: survival, c_delta, growth-rate fits, the
// three-case classifier and a brute-force path counter.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lingrowth/evolution.hpp"
#include "lingrowth/kernels.hpp"
#include "json.hpp"

namespace lingrowth {

class ExtinctError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonBinaryKernelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kReportSchemaVersion = 1;

struct Estimate {
  double value = 0.0;
  double se = 0.0;
  int samples = 0;
};

/// Fraction of successes with binomial standard error.
Estimate binomial_estimate(int successes, int trials);
/// Mean with the standard error of the mean (compensated sums).
Estimate mean_estimate(std::span<const double> xs);

struct Tolerances {
  double rate = 0.05;
  double sigmas = 3.0;
  double growth_threshold = 0.02;
};

enum class MassMode { kLinear, kLog, kExact };
const char* mass_mode_name(MassMode m);

enum class Verdict { kCase1, kCase2, kCase3 };
const char* verdict_name(Verdict v);

struct GrowthReport {
  std::string model;
  double delta = 0.0;
  int m = 1;
  Estimate survival;
  Estimate heavy_prob;
  std::optional<Site> heavy_site;
  bool heavy_exact = true;
  double c_delta_hat = 0.0;
  double c_delta_se = 0.0;
  double bound = 0.0;
  std::optional<Estimate> fitted_rate;
  std::optional<Verdict> classifier;
  int replicas = 0;
  int horizon = 0;
  int lookahead = 0;
  double tail_fraction = 0.5;
  Tolerances tolerances;
  /// Mean of ln(1 + |M_N|) / N over all replicas.
  std::optional<double> cesaro_log_mass;
};

nlohmann::json to_json(const GrowthReport& r);
std::string report_csv_header();
std::string report_csv_row(const GrowthReport& r);

/// Replica i of a master seed runs on derive_seed(seed, i).
Estimate survival_prob(const ModelSpec& model, int horizon, int replicas, std::uint64_t seed,
                       int threads = 1);

/// survival of the base chain to `horizon` times the heavy probability of the
/// m-fold product; bound = c * ln(1 + delta) / m. No heavy entry gives c = 0.
GrowthReport c_delta(const ModelSpec& model, double delta, int m, int horizon, int replicas,
                     std::uint64_t seed, const HeavyOptions& heavy = {}, int threads = 1);

struct RateFit {
  double rate = 0.0;
  double se = 0.0;
  int points = 0;
};

/// Least-squares slope of log_mass[n] against n over the last tail fraction.
/// Throws ExtinctError if the last value is -inf.
RateFit fit_growth(std::span<const double> log_mass, double tail_fraction = 0.5);
/// Same against explicit times.
RateFit fit_growth(std::span<const double> times, std::span<const double> log_mass,
                   double tail_fraction = 0.5);

template <class Arith>
std::vector<double> log_mass_series(const BasicTrajectory<Arith>& traj) {
  std::vector<double> out;
  out.reserve(traj.fields.size());
  for (const auto& f : traj.fields) out.push_back(f.log_total());
  return out;
}

/// One replica of a growth experiment.
struct ReplicaSummary {
  int index = 0;
  std::uint64_t seed = 0;
  bool alive_lookahead = false;
  bool alive_horizon = false;
  double final_log_mass = 0.0;
  /// First n with M_n = 0.
  std::optional<int> extinct_at;
  std::optional<RateFit> rate;
  /// Snapshot rows, filled on request.
  std::string snapshot_csv;
};

struct GrowthRun {
  GrowthReport report;
  std::vector<ReplicaSummary> replicas;
};

struct GrowthOptions {
  double delta = 0.5;
  int m = 1;
  int horizon = 200;
  int lookahead = 40;
  int replicas = 20;
  std::uint64_t seed = 1;
  double tail_fraction = 0.5;
  MassMode mode = MassMode::kLog;
  int threads = 1;
  bool keep_snapshots = false;
  HeavyOptions heavy;
  Tolerances tolerances;
};

/// Runs the replicas, fits rates on the survivors and fills a full report.
/// c_delta uses survival to the lookahead, the same proxy the path module uses.
GrowthRun estimate_growth(const ModelSpec& model, const GrowthOptions& opts);

struct Classification {
  Verdict verdict = Verdict::kCase3;
  bool inconclusive = false;
  Estimate survival;
  std::vector<double> deltas;
  std::vector<Estimate> c_hat;
  bool two_site = false;
  std::string reason;
};

Classification classify(const ModelSpec& model, std::span<const double> delta_grid, int horizon,
                        int replicas, std::uint64_t seed, const Tolerances& tol = {},
                        const HeavyOptions& heavy = {}, int threads = 1);
nlohmann::json to_json(const Classification& c);

/// Number of open paths (0, o) -> (n, x) by depth-first enumeration.
/// Needs a binary kernel along the explored paths and n <= 14.
BigInt brute_force_paths(const Environment& env, int n, const Site& x);

}  // namespace lingrowth
