#include "lingrowth/cli.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "lingrowth/parallel.hpp"
#include "lingrowth/pathfinder.hpp"
#include "lingrowth/rng.hpp"

#ifndef LINGROWTH_VERSION
#define LINGROWTH_VERSION "0.0.0"
#endif

namespace lingrowth::cli {

const char* const kVersion = LINGROWTH_VERSION;

using nlohmann::json;

namespace {

std::string line_col(const std::string& text, std::size_t byte) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  // the parser reports the byte after the offending character
  return std::to_string(line) + ":" + std::to_string(std::max(1, col - 1));
}

Site site_from_json(const json& j) {
  if (!j.is_array() || j.empty() || j.size() > static_cast<std::size_t>(kMaxDim)) {
    throw ConfigError("a site is an array of 1.." + std::to_string(kMaxDim) + " integers");
  }
  const auto v = j.get<std::vector<int>>();
  return Site::from_coords(v);
}

UnitLaw law_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("outcomes must be an array");
  UnitLaw law;
  for (const auto& o : j) {
    UnitOutcome out{o.at("prob").get<double>(), {}};
    for (const auto& e : o.at("entries")) {
      out.entries.push_back({site_from_json(e.at("offset")), e.at("value").get<double>()});
    }
    law.push_back(std::move(out));
  }
  return law;
}

json law_to_json(const UnitLaw& law) {
  json arr = json::array();
  for (const auto& o : law) {
    json entries = json::array();
    for (const auto& e : o.entries) entries.push_back({{"offset", e.offset.coords()}, {"value", e.value}});
    arr.push_back({{"prob", o.prob}, {"entries", std::move(entries)}});
  }
  return arr;
}

template <class T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

std::string header_line(const ExperimentConfig& c) {
  return std::string("# lingrowth ") + kVersion + " config " + config_hash(c);
}

json stamp(const ExperimentConfig& c) {
  json j;
  j["version"] = kVersion;
  j["config_hash"] = config_hash(c);
  j["config"] = to_json(c);
  j["config"].erase("out");
  j["config"].erase("threads");
  return j;
}

std::filesystem::path out_file(const ExperimentConfig& c, const char* name) {
  std::filesystem::create_directories(c.out);
  return std::filesystem::path(c.out) / name;
}

void write_text(const std::filesystem::path& p, const std::string& body, CommandResult& r) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  f << body;
  r.files.push_back(p.string());
}

json rate_json(const std::optional<RateFit>& f) {
  if (!f) return nullptr;
  return {{"rate", f->rate}, {"stderr", f->se}, {"points", f->points}};
}

json estimate_to_json(const Estimate& e) {
  return {{"value", e.value}, {"stderr", e.se}, {"samples", e.samples}};
}

constexpr int kMinSurvivalReplicas = 2000;

HeavyOptions heavy_options(const ExperimentConfig& c) {
  HeavyOptions h;
  h.epsilon = c.epsilon;
  return h;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ":" + line_col(text, e.byte) + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

ExperimentConfig config_from_json(const json& j, const ExperimentConfig& base) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c = base;
  for (const auto& [key, val] : j.items()) {
    if (key == "model") c.model = get_as<std::string>(val, key);
    else if (key == "p") c.p = get_as<double>(val, key);
    else if (key == "q") c.q = get_as<double>(val, key);
    else if (key == "v") c.v = get_as<double>(val, key);
    else if (key == "dim") c.dim = get_as<int>(val, key);
    else if (key == "neighborhood") {
      c.neighborhood.clear();
      try {
        for (const auto& s : val) c.neighborhood.push_back(site_from_json(s));
      } catch (const std::exception& e) {
        throw ConfigError("key 'neighborhood': " + std::string(e.what()));
      }
    } else if (key == "orientation") {
      const auto o = get_as<std::string>(val, key);
      if (o == "row") c.orientation = Orientation::kRow;
      else if (o == "column") c.orientation = Orientation::kColumn;
      else throw ConfigError("key 'orientation': expected \"row\" or \"column\"");
    } else if (key == "table") {
      try {
        c.table = law_from_json(val);
      } catch (const std::exception& e) {
        throw ConfigError("key 'table': " + std::string(e.what()));
      }
    } else if (key == "delta") c.delta = get_as<double>(val, key);
    else if (key == "epsilon") c.epsilon = get_as<double>(val, key);
    else if (key == "deltas") c.deltas = get_as<std::vector<double>>(val, key);
    else if (key == "m") c.m = get_as<int>(val, key);
    else if (key == "horizon") c.horizon = get_as<int>(val, key);
    else if (key == "lookahead") {
      if (val.is_null()) c.lookahead.reset();
      else c.lookahead = get_as<int>(val, key);
    } else if (key == "replicas") c.replicas = get_as<int>(val, key);
    else if (key == "seed") c.seed = get_as<std::uint64_t>(val, key);
    else if (key == "tail") c.tail = get_as<double>(val, key);
    else if (key == "log_mass") c.log_mass = get_as<bool>(val, key);
    else if (key == "exact") c.exact = get_as<bool>(val, key);
    else if (key == "tolerances") {
      for (const auto& [tk, tv] : val.items()) {
        if (tk == "rate") c.tolerances.rate = get_as<double>(tv, "tolerances.rate");
        else if (tk == "sigmas") c.tolerances.sigmas = get_as<double>(tv, "tolerances.sigmas");
        else if (tk == "growth_threshold")
          c.tolerances.growth_threshold = get_as<double>(tv, "tolerances.growth_threshold");
        else throw ConfigError("unknown key 'tolerances." + tk + "'");
      }
    } else if (key == "out") c.out = get_as<std::string>(val, key);
    else if (key == "threads") c.threads = get_as<int>(val, key);
    else throw ConfigError("unknown key '" + key + "'");
  }
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["model"] = c.model;
  j["p"] = c.p;
  j["q"] = c.q;
  j["v"] = c.v;
  j["dim"] = c.dim;
  json nb = json::array();
  for (const auto& s : c.neighborhood) nb.push_back(s.coords());
  j["neighborhood"] = std::move(nb);
  j["orientation"] = c.orientation == Orientation::kRow ? "row" : "column";
  j["table"] = law_to_json(c.table);
  j["delta"] = c.delta;
  j["epsilon"] = c.epsilon;
  j["deltas"] = c.deltas;
  j["m"] = c.m;
  j["horizon"] = c.horizon;
  j["lookahead"] = c.lookahead ? json(*c.lookahead) : json(nullptr);
  j["replicas"] = c.replicas;
  j["seed"] = c.seed;
  j["tail"] = c.tail;
  j["log_mass"] = c.log_mass;
  j["exact"] = c.exact;
  j["tolerances"] = {{"rate", c.tolerances.rate},
                     {"sigmas", c.tolerances.sigmas},
                     {"growth_threshold", c.tolerances.growth_threshold}};
  j["out"] = c.out;
  j["threads"] = c.threads;
  return j;
}

std::string config_hash(const ExperimentConfig& c) {
  json j = to_json(c);
  j.erase("out");
  j.erase("threads");
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void validate(const ExperimentConfig& c) {
  if (c.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (c.replicas < 1) throw ConfigError("replicas must be >= 1");
  if (c.m < 1) throw ConfigError("m must be >= 1");
  if (c.lookahead && *c.lookahead < 1) throw ConfigError("lookahead must be >= 1");
  if (!(c.delta > 0.0)) throw ConfigError("delta must be > 0");
  if (c.epsilon < 0.0) throw ConfigError("epsilon must be >= 0");
  if (!(c.tail > 0.0 && c.tail <= 1.0)) throw ConfigError("tail must lie in (0, 1]");
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  if (c.log_mass && c.exact) throw ConfigError("--log-mass and --exact are exclusive");
  if (c.dim < 1 || c.dim > kMaxDim) throw ConfigError("dim must lie in 1.." + std::to_string(kMaxDim));
  for (double d : c.deltas) {
    if (!(d > 0.0)) throw ConfigError("deltas must be > 0");
  }
}

ModelSpec make_model(const ExperimentConfig& c) {
  ModelSpec m = [&] {
    if (c.model == "site_op") return ModelSpec::site_op(c.p, c.dim);
    if (c.model == "bond_op") return ModelSpec::bond_op(c.p, c.dim);
    if (c.model == "bcpp_lse") return ModelSpec::bcpp_lse(c.p, c.q, c.dim);
    if (c.model == "bcpp_dlse") return ModelSpec::bcpp_dlse(c.p, c.q, c.dim);
    if (c.model == "weighted_bernoulli") return ModelSpec::weighted_bernoulli(c.p, c.v, c.neighborhood, c.dim);
    if (c.model == "table") return ModelSpec::table(c.orientation, c.table, c.dim);
    throw ConfigError("unknown model '" + c.model + "'");
  }();
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("model " + c.model + ": " + e.what());
  }
  return m;
}

CtKernel make_ct_kernel(const ExperimentConfig& c) {
  const Site o = Site::origin(c.dim);
  try {
    if (c.model == "identity") return CtKernel::deterministic(c.dim, {{o, 1.0}});
    if (c.model == "doubling") return CtKernel::deterministic(c.dim, {{o, 2.0}});
    if (c.model == "branching") {
      return CtKernel::from_law(c.dim, {{1.0 - c.p, {{o, 1.0}}},
                                        {c.p, {{o, 1.0}, {Site::unit(c.dim, 0), 1.0}}}});
    }
    if (c.model == "walk") {
      UnitLaw law;
      const auto nn = nearest_neighbors(c.dim);
      for (const auto& e : nn) law.push_back({1.0 / static_cast<double>(nn.size()), {{e, 1.0}}});
      return CtKernel::from_law(c.dim, std::move(law));
    }
    if (c.model == "table") return CtKernel::from_law(c.dim, c.table);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("ct kernel " + c.model + ": " + e.what());
  }
  throw ConfigError("unknown ct kernel '" + c.model + "' (identity, doubling, branching, walk, table)");
}

MassMode mass_mode(const ExperimentConfig& c) {
  if (c.exact) return MassMode::kExact;
  if (c.log_mass) return MassMode::kLog;
  return MassMode::kLinear;
}

int lookahead_of(const ExperimentConfig& c) {
  if (c.lookahead) return *c.lookahead;
  const auto model = make_model(c);
  const int r = c.m > 1 ? ModelSpec::product(model, c.m).range() : model.range();
  return 20 * r;
}

CommandResult cmd_run(const ExperimentConfig& c) {
  validate(c);
  const auto model = make_model(c);
  GrowthOptions o;
  o.delta = c.delta;
  o.m = c.m;
  o.horizon = c.horizon;
  o.lookahead = lookahead_of(c);
  o.replicas = c.replicas;
  o.seed = c.seed;
  o.tail_fraction = c.tail;
  o.mode = mass_mode(c);
  o.threads = c.threads;
  o.keep_snapshots = true;
  o.heavy = heavy_options(c);
  o.tolerances = c.tolerances;
  const auto run = estimate_growth(model, o);

  CommandResult r;
  std::string csv = header_line(c) + "\n" + kSnapshotHeader + "\n";
  for (const auto& s : run.replicas) csv += s.snapshot_csv;
  write_text(out_file(c, "run_snapshots.csv"), csv, r);

  json j = stamp(c);
  j["report"] = to_json(run.report);
  j["mass_mode"] = mass_mode_name(o.mode);
  json reps = json::array();
  int extinct = 0;
  for (const auto& s : run.replicas) {
    reps.push_back({{"index", s.index},
                    {"seed", s.seed},
                    {"alive_lookahead", s.alive_lookahead},
                    {"alive_horizon", s.alive_horizon},
                    {"extinct_at", s.extinct_at ? json(*s.extinct_at) : json(nullptr)},
                    {"final_log_mass", format_double(s.final_log_mass)},
                    {"rate", rate_json(s.rate)}});
    extinct += s.extinct_at ? 1 : 0;
  }
  j["replicas"] = std::move(reps);
  write_text(out_file(c, "run_summary.json"), j.dump(2) + "\n", r);
  std::ostringstream msg;
  msg << model.name() << ": " << run.replicas.size() - static_cast<std::size_t>(extinct) << "/"
      << run.replicas.size() << " alive at n=" << c.horizon;
  if (run.report.fitted_rate) msg << ", mean rate " << format_double(run.report.fitted_rate->value);
  msg << ", bound " << format_double(run.report.bound);
  r.message = msg.str();
  return r;
}

CommandResult cmd_path(const ExperimentConfig& c) {
  validate(c);
  const auto base = make_model(c);
  const auto model = c.m > 1 ? ModelSpec::product(base, c.m) : base;
  const int lookahead = lookahead_of(c);
  const auto heavy = heavy_options(c);
  const Site x = preferred_offset(model, c.delta, heavy);

  struct One {
    PathTrace trace;
  };
  auto traces = parallel_map(static_cast<std::size_t>(c.replicas), c.threads, [&](std::size_t i) {
    SampledEnvironment env(model, rng::derive_seed(c.seed, i));
    One one;
    one.trace = trace_paths(env, c.horizon, x, c.delta, lookahead);
    return one;
  });

  std::array<long, 5> rules{};
  long steps = 0;
  int percolating = 0;
  std::vector<double> freqs;
  json reps = json::array();
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& t = traces[i].trace;
    for (std::size_t k = 1; k < t.rule.size(); ++k) {
      ++rules[static_cast<std::size_t>(t.rule[k])];
      ++steps;
    }
    json rep{{"index", i}, {"percolation_start", t.percolation_start}};
    if (t.percolation_start) {
      ++percolating;
      const auto f = good_frequency(t);
      freqs.push_back(f.frequency);
      rep["good_frequency"] = f.frequency;
      rep["good_counted"] = f.counted;
      rep["good_hits"] = f.hits;
      rep["tau_count"] = t.tau.size();
      rep["pruned"] = t.pruned.size();
    }
    reps.push_back(std::move(rep));
  }

  std::size_t pick = 0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (traces[i].trace.percolation_start) {
      pick = i;
      break;
    }
  }
  const auto& shown = traces[pick].trace;
  std::vector<double> log_mass;
  if (!shown.big_gamma.empty()) {
    auto env = std::make_shared<SampledEnvironment>(model, rng::derive_seed(c.seed, pick));
    const auto traj = run<LogArith>(env, static_cast<int>(shown.big_gamma.size()) - 1,
                                    LogMassField::delta(Site::origin(model.dim)));
    log_mass = mass_along(traj, std::span<const Site>(shown.big_gamma));
  }

  CommandResult r;
  std::ostringstream csv;
  csv << header_line(c) << " replica " << pick << "\n";
  write_trace_csv(csv, shown, log_mass);
  write_text(out_file(c, "path_trace.csv"), csv.str(), r);

  json j = stamp(c);
  j["model"] = model.name();
  j["heavy_offset"] = x.coords();
  j["lookahead"] = lookahead;
  json hist;
  for (std::size_t k = 1; k < rules.size(); ++k) {
    hist[rule_name(static_cast<Rule>(k))] = steps ? static_cast<double>(rules[k]) / static_cast<double>(steps) : 0.0;
  }
  j["rule_histogram"] = hist;
  j["percolating"] = percolating;
  // survival to L is cheap, so it gets far more replicas than the traces;
  // the first `replicas` of them are the traced environments
  const auto survival = survival_prob(model, std::min(lookahead, c.horizon),
                                      std::max(c.replicas, kMinSurvivalReplicas), c.seed, c.threads);
  double heavy_prob = 0.0;
  try {
    heavy_prob = heavy_site(model, c.delta, heavy).prob;
  } catch (const NoHeavyEntryError&) {
  }
  const double c_hat = survival.value * heavy_prob;
  j["survival_lookahead"] = estimate_to_json(survival);
  j["heavy_prob"] = heavy_prob;
  j["c_delta_hat"] = c_hat;
  if (!freqs.empty()) {
    const auto mf = mean_estimate(freqs);
    j["good_frequency"] = estimate_to_json(mf);
    j["good_frequency_matches_c_delta"] = std::abs(mf.value - c_hat) <= c.tolerances.rate;
  } else {
    j["good_frequency"] = nullptr;
  }
  j["trace_replica"] = pick;
  j["replicas"] = std::move(reps);
  write_text(out_file(c, "path_summary.json"), j.dump(2) + "\n", r);
  r.message = model.name() + ": " + std::to_string(percolating) + "/" + std::to_string(c.replicas) +
              " replicas percolate from the origin";
  return r;
}

CommandResult cmd_classify(const ExperimentConfig& c) {
  validate(c);
  const auto model = make_model(c);
  const auto cl = classify(model, c.deltas, c.horizon, c.replicas, c.seed, c.tolerances,
                           heavy_options(c), c.threads);
  CommandResult r;
  json j = stamp(c);
  j["model"] = model.name();
  j["classification"] = to_json(cl);
  write_text(out_file(c, "classify.json"), j.dump(2) + "\n", r);
  r.message = model.name() + ": " + verdict_name(cl.verdict) + (cl.inconclusive ? " (inconclusive)" : "") +
              " - " + cl.reason;
  if (cl.inconclusive) r.exit_code = kInconclusive;
  return r;
}

namespace {

template <class Arith>
json ct_replicas(const ExperimentConfig& c, const CtKernel& kernel, std::string& snapshots,
                 std::string& events) {
  auto runs = parallel_map(static_cast<std::size_t>(c.replicas), c.threads, [&](std::size_t i) {
    CtOptions opts;
    opts.log_events = i == 0;
    return ct_run_y<Arith>(kernel, rng::derive_seed(c.seed, i),
                           BasicMassField<Arith>::delta(Site::origin(kernel.dim)),
                           static_cast<double>(c.horizon), opts);
  });
  json reps = json::array();
  std::ostringstream os;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& run = runs[i];
    write_snapshot_rows<Arith>(os, std::span<const BasicMassField<Arith>>(run.snapshots),
                               static_cast<int>(i));
    std::vector<double> lm;
    for (const auto& s : run.snapshots) lm.push_back(s.log_total());
    const bool alive = !run.snapshots.back().empty();
    std::optional<RateFit> rate;
    if (alive && lm.size() >= 2) rate = fit_growth(lm, c.tail);
    reps.push_back({{"index", i},
                    {"seed", rng::derive_seed(c.seed, i)},
                    {"alive_horizon", alive},
                    {"final_log_mass", format_double(lm.back())},
                    {"event_count", run.event_count},
                    {"noop_count", run.noop_count},
                    {"rate", rate_json(rate)}});
  }
  snapshots = os.str();
  std::ostringstream ev;
  write_event_csv(ev, runs.front().events);
  events = ev.str();
  return reps;
}

}  // namespace

CommandResult cmd_ct(const ExperimentConfig& c) {
  validate(c);
  const auto kernel = make_ct_kernel(c);
  std::string snapshots;
  std::string events;
  json reps;
  switch (mass_mode(c)) {
    case MassMode::kLinear: reps = ct_replicas<LinearArith>(c, kernel, snapshots, events); break;
    case MassMode::kLog: reps = ct_replicas<LogArith>(c, kernel, snapshots, events); break;
    case MassMode::kExact: reps = ct_replicas<ExactArith>(c, kernel, snapshots, events); break;
  }

  // discrete chain over unit-time slices against the continuous run
  const int replay_steps = std::min(c.horizon, 6);
  const auto seed0 = rng::derive_seed(c.seed, 0);
  const auto ct = ct_run_y<LinearArith>(kernel, seed0, MassField::delta(Site::origin(kernel.dim)),
                                        static_cast<double>(replay_steps));
  auto env = std::make_shared<CtDiscretizedEnvironment>(kernel, seed0);
  const auto dt = run<LinearArith>(env, replay_steps, MassField::delta(Site::origin(kernel.dim)));
  bool replay = true;
  for (int n = 0; n <= replay_steps && replay; ++n) {
    const auto& a = dt.at(n).entries();
    const auto& b = ct.snapshots[static_cast<std::size_t>(n)].entries();
    replay = a.size() == b.size() &&
             std::equal(a.begin(), a.end(), b.begin(),
                        [](const auto& x, const auto& y) { return x.site == y.site && x.value == y.value; });
  }

  CommandResult r;
  const std::string head = header_line(c) + "\n";
  write_text(out_file(c, "ct_snapshots.csv"), head + kSnapshotHeader + "\n" + snapshots, r);
  write_text(out_file(c, "ct_events.csv"), head + events, r);

  const auto cl = ct_classify(kernel);
  json j = stamp(c);
  j["classification"] = {{"verdict", verdict_name(cl.verdict)},
                         {"prob_sum_above_one", cl.prob_sum_above_one},
                         {"prob_sum_equal_one", cl.prob_sum_equal_one},
                         {"coalescing", cl.coalescing},
                         {"reason", cl.reason}};
  j["replay_steps"] = replay_steps;
  j["replay_exact"] = replay;
  std::vector<double> rates;
  for (const auto& rep : reps) {
    if (!rep["rate"].is_null()) rates.push_back(rep["rate"]["rate"].get<double>());
  }
  j["mean_rate"] = rates.empty() ? json(nullptr) : estimate_to_json(mean_estimate(rates));
  j["replicas"] = std::move(reps);
  write_text(out_file(c, "ct_summary.json"), j.dump(2) + "\n", r);
  r.message = std::string("ct ") + c.model + ": " + verdict_name(cl.verdict) +
              ", replay " + (replay ? "exact" : "MISMATCH");
  if (!replay) r.exit_code = kNumericalGuard;
  return r;
}

CommandResult cmd_oracle(const ExperimentConfig& c) {
  validate(c);
  const auto model = make_model(c);
  const int n = std::min(c.horizon, c.dim == 1 ? 12 : 6);
  const auto sites = linf_ball(c.dim, n + 1);
  auto results = parallel_map(static_cast<std::size_t>(c.replicas), c.threads, [&](std::size_t i) {
    const auto t = run<ExactArith>(model, rng::derive_seed(c.seed, i), n);
    int bad = 0;
    for (const auto& x : sites) {
      const auto* v = t.at(n).find(x);
      if ((v ? *v : BigInt(0)) != brute_force_paths(*t.env, n, x)) ++bad;
    }
    return bad;
  });
  int mismatches = 0;
  for (int b : results) mismatches += b;
  CommandResult r;
  json j = stamp(c);
  j["model"] = model.name();
  j["n"] = n;
  j["sites_per_replica"] = sites.size();
  j["mismatches"] = mismatches;
  write_text(out_file(c, "oracle.json"), j.dump(2) + "\n", r);
  r.message = model.name() + ": " + std::to_string(mismatches) + " mismatches over " +
              std::to_string(c.replicas) + " replicas at n=" + std::to_string(n);
  if (mismatches) r.exit_code = kNumericalGuard;
  return r;
}

CommandResult dispatch(const std::string& command, const ExperimentConfig& c) {
  CommandResult r;
  try {
    if (command == "run") return cmd_run(c);
    if (command == "path") return cmd_path(c);
    if (command == "classify") return cmd_classify(c);
    if (command == "ct") return cmd_ct(c);
    if (command == "oracle") return cmd_oracle(c);
    r.exit_code = kConfigError;
    r.message = "unknown command '" + command + "'";
  } catch (const ConfigError& e) {
    r.exit_code = kConfigError;
    r.message = std::string("config error: ") + e.what();
  } catch (const NonBinaryKernelError& e) {
    r.exit_code = kConfigError;
    r.message = std::string("config error: ") + e.what();
  } catch (const std::invalid_argument& e) {
    r.exit_code = kConfigError;
    r.message = std::string("config error: ") + e.what();
  } catch (const std::exception& e) {
    // overflow, window and integrality guards
    r.exit_code = kNumericalGuard;
    r.message = std::string("numerical guard: ") + e.what();
  }
  return r;
}

}  // namespace lingrowth::cli
