#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "lingrowth/cli.hpp"

using namespace lingrowth;

int main(int argc, char** argv) {
  CLI::App app{"Growth of linear systems in random environment"};
  app.set_version_flag("--version", std::string("lingrowth ") + cli::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> model;
  std::optional<double> p, q, v, delta, epsilon, tail;
  std::optional<int> m, horizon, lookahead, replicas, dim, threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool log_mass = false;
  bool exact = false;

  app.add_option("--config", config_path, "JSON config; flags override its values")
      ->check(CLI::ExistingFile);
  app.add_option("--model", model,
                 "site_op, bond_op, bcpp_lse, bcpp_dlse, weighted_bernoulli, table; "
                 "ct: identity, doubling, branching, walk, table");
  app.add_option("--p", p, "open / success probability");
  app.add_option("--q", q, "second BCPP probability");
  app.add_option("--v", v, "weight of open weighted Bernoulli bonds");
  app.add_option("--delta", delta, "heavy threshold 1 + delta");
  app.add_option("--epsilon", epsilon, "heavy-site fallback tolerance");
  app.add_option("--m", m, "product length");
  app.add_option("--dim", dim, "lattice dimension");
  app.add_option("--horizon", horizon, "steps N (time horizon for ct)");
  app.add_option("--lookahead", lookahead, "percolation proxy lookahead L");
  app.add_option("--replicas", replicas, "number of replicas R");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--tail", tail, "fraction of the run used by the rate fit");
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", threads, "worker threads; outputs do not depend on it");
  app.add_flag("--log-mass", log_mass, "keep masses as logarithms");
  app.add_flag("--exact", exact, "big-integer masses");

  for (const char* name : {"run", "path", "classify", "ct", "oracle"}) {
    app.add_subcommand(name)->fallthrough();
  }
  app.get_subcommand("run")->description("trajectories and growth report");
  app.get_subcommand("path")->description("gamma / Gamma trace and good events");
  app.get_subcommand("classify")->description("case 1 / 2 / 3 verdict");
  app.get_subcommand("ct")->description("continuous-time process and discretization check");
  app.get_subcommand("oracle")->description("exact masses against brute-force path counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kConfigError;
  }

  cli::ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = cli::load_config(config_path);
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cli::kConfigError;
  }
  if (model) cfg.model = *model;
  if (p) cfg.p = *p;
  if (q) cfg.q = *q;
  if (v) cfg.v = *v;
  if (delta) cfg.delta = *delta;
  if (epsilon) cfg.epsilon = *epsilon;
  if (m) cfg.m = *m;
  if (dim) cfg.dim = *dim;
  if (horizon) cfg.horizon = *horizon;
  if (lookahead) cfg.lookahead = *lookahead;
  if (replicas) cfg.replicas = *replicas;
  if (seed) cfg.seed = *seed;
  if (tail) cfg.tail = *tail;
  if (out) cfg.out = *out;
  if (threads) cfg.threads = *threads;
  if (log_mass) {
    cfg.log_mass = true;
    cfg.exact = false;
  }
  if (exact) cfg.exact = true;

  const auto result = cli::dispatch(app.get_subcommands().front()->get_name(), cfg);
  for (const auto& f : result.files) std::cout << "wrote " << f << "\n";
  if (!result.message.empty()) {
    (result.exit_code == cli::kOk ? std::cout : std::cerr) << result.message << "\n";
  }
  return result.exit_code;
}
