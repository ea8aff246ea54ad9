#include "lingrowth/estimator.hpp"

#include <sstream>

#include "lingrowth/parallel.hpp"
#include "lingrowth/rng.hpp"

namespace lingrowth {

Estimate binomial_estimate(int successes, int trials) {
  if (trials <= 0) throw std::invalid_argument("need at least one trial");
  const double p = static_cast<double>(successes) / trials;
  return {p, std::sqrt(p * (1.0 - p) / trials), trials};
}

Estimate mean_estimate(std::span<const double> xs) {
  Estimate e;
  e.samples = static_cast<int>(xs.size());
  if (xs.empty()) return e;
  CompensatedSum s;
  for (double x : xs) s.add(x);
  e.value = s.value() / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    CompensatedSum ss;
    for (double x : xs) ss.add((x - e.value) * (x - e.value));
    const double var = ss.value() / static_cast<double>(xs.size() - 1);
    e.se = std::sqrt(var / static_cast<double>(xs.size()));
  }
  return e;
}

const char* mass_mode_name(MassMode m) {
  switch (m) {
    case MassMode::kLinear: return "linear";
    case MassMode::kLog: return "log";
    case MassMode::kExact: return "exact";
  }
  return "?";
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kCase1: return "case1";
    case Verdict::kCase2: return "case2";
    case Verdict::kCase3: return "case3";
  }
  return "?";
}

namespace {

nlohmann::json estimate_json(const Estimate& e) {
  return {{"value", e.value}, {"stderr", e.se}, {"samples", e.samples}};
}

nlohmann::json tolerance_json(const Tolerances& t) {
  return {{"rate", t.rate}, {"sigmas", t.sigmas}, {"growth_threshold", t.growth_threshold}};
}

// c = s * h with first-order error propagation.
Estimate product_estimate(const Estimate& s, const Estimate& h) {
  Estimate c;
  c.value = s.value * h.value;
  c.se = std::hypot(h.value * s.se, s.value * h.se);
  c.samples = s.samples;
  return c;
}

struct HeavyResult {
  Estimate prob;
  std::optional<Site> site;
  bool exact = true;
};

HeavyResult heavy_of(const ModelSpec& model, double delta, int m, const HeavyOptions& opts) {
  const ModelSpec k = m == 1 ? model : ModelSpec::product(model, m);
  HeavyResult r;
  try {
    const auto info = heavy_site(k, delta, opts);
    r.prob = {info.prob, info.stderr_prob, info.exact ? 0 : opts.mc_samples};
    r.site = info.site;
    r.exact = info.exact;
  } catch (const NoHeavyEntryError&) {
    r.prob = {};
  }
  return r;
}

Verdict decide(const Estimate& survival, std::span<const Estimate> c_hat, bool two_site,
               const Tolerances& tol, bool& inconclusive, std::string& reason) {
  auto significant = [&](const Estimate& e) { return e.value - tol.sigmas * e.se > 0.0; };
  bool some_c = false;
  bool borderline_c = false;
  for (const auto& c : c_hat) {
    if (significant(c)) some_c = true;
    else if (c.value > 0.0) borderline_c = true;
  }
  const bool surv = significant(survival);
  const bool borderline_surv = !surv && survival.value > 0.0;
  inconclusive = false;
  if (some_c) {
    reason = "a heavy entry has positive probability and the chain survives";
    return Verdict::kCase1;
  }
  if (surv && two_site) {
    reason = "survival with a two-site unit";
    inconclusive = borderline_c;
    return Verdict::kCase2;
  }
  reason = surv ? "survival but every unit has at most one entry" : "no significant survival";
  inconclusive = borderline_c || (borderline_surv && two_site);
  return Verdict::kCase3;
}

double cesaro_term(double log_mass, int horizon) {
  if (horizon <= 0) return 0.0;
  double v;
  if (log_mass == -std::numeric_limits<double>::infinity()) v = 0.0;
  else if (log_mass > 30.0) v = log_mass + std::log1p(std::exp(-log_mass));
  else v = std::log1p(std::exp(log_mass));
  return v / horizon;
}

template <class Arith>
ReplicaSummary run_replica(const ModelSpec& model, const GrowthOptions& o, int index) {
  ReplicaSummary r;
  r.index = index;
  r.seed = rng::derive_seed(o.seed, static_cast<std::uint64_t>(index));
  auto env = std::make_shared<SampledEnvironment>(model, r.seed);
  const auto traj = run<Arith>(env, o.horizon, BasicMassField<Arith>::delta(Site::origin(model.dim)));
  const auto logs = log_mass_series(traj);
  r.alive_lookahead = !traj.at(std::min(o.lookahead, o.horizon)).empty();
  r.alive_horizon = !traj.at(o.horizon).empty();
  r.final_log_mass = logs.back();
  if (!r.alive_horizon) {
    int n = 0;
    while (!traj.at(n).empty()) ++n;
    r.extinct_at = n;
  }
  if (r.alive_horizon && o.horizon >= 2) r.rate = fit_growth(logs, o.tail_fraction);
  if (o.keep_snapshots) {
    std::ostringstream os;
    write_snapshot_rows(os, traj, index);
    r.snapshot_csv = os.str();
  }
  return r;
}

}  // namespace

nlohmann::json to_json(const GrowthReport& r) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["model"] = r.model;
  j["delta"] = r.delta;
  j["m"] = r.m;
  j["survival"] = estimate_json(r.survival);
  j["heavy_prob"] = estimate_json(r.heavy_prob);
  j["heavy_site"] = r.heavy_site ? nlohmann::json(r.heavy_site->coords()) : nlohmann::json();
  j["heavy_exact"] = r.heavy_exact;
  j["c_delta_hat"] = r.c_delta_hat;
  j["c_delta_stderr"] = r.c_delta_se;
  j["bound"] = r.bound;
  j["fitted_rate"] = r.fitted_rate ? estimate_json(*r.fitted_rate) : nlohmann::json();
  j["classifier"] = r.classifier ? nlohmann::json(verdict_name(*r.classifier)) : nlohmann::json();
  j["replicas"] = r.replicas;
  j["horizon"] = r.horizon;
  j["lookahead"] = r.lookahead;
  j["tail_fraction"] = r.tail_fraction;
  j["tolerances"] = tolerance_json(r.tolerances);
  j["cesaro_log_mass"] = r.cesaro_log_mass ? nlohmann::json(*r.cesaro_log_mass) : nlohmann::json();
  return j;
}

std::string report_csv_header() {
  return "schema_version,model,delta,m,survival,survival_stderr,heavy_prob,heavy_prob_stderr,"
         "heavy_site,c_delta_hat,c_delta_stderr,bound,fitted_rate,fitted_rate_stderr,classifier,"
         "replicas,horizon,lookahead";
}

std::string report_csv_row(const GrowthReport& r) {
  std::ostringstream os;
  os << kReportSchemaVersion << ',' << r.model << ',' << format_double(r.delta) << ',' << r.m << ','
     << format_double(r.survival.value) << ',' << format_double(r.survival.se) << ','
     << format_double(r.heavy_prob.value) << ',' << format_double(r.heavy_prob.se) << ','
     << (r.heavy_site ? r.heavy_site->to_string() : "") << ',' << format_double(r.c_delta_hat)
     << ',' << format_double(r.c_delta_se) << ',' << format_double(r.bound) << ',';
  if (r.fitted_rate) {
    os << format_double(r.fitted_rate->value) << ',' << format_double(r.fitted_rate->se);
  } else {
    os << ',';
  }
  os << ',' << (r.classifier ? verdict_name(*r.classifier) : "") << ',' << r.replicas << ','
     << r.horizon << ',' << r.lookahead;
  return os.str();
}

Estimate survival_prob(const ModelSpec& model, int horizon, int replicas, std::uint64_t seed,
                       int threads) {
  if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
  model.validate();
  const auto alive = parallel_map(static_cast<std::size_t>(replicas), threads, [&](std::size_t i) {
    SampledEnvironment env(model, rng::derive_seed(seed, i));
    return alive_until(env, 0, Site::origin(model.dim), horizon) ? 1 : 0;
  });
  int s = 0;
  for (int a : alive) s += a;
  return binomial_estimate(s, replicas);
}

GrowthReport c_delta(const ModelSpec& model, double delta, int m, int horizon, int replicas,
                     std::uint64_t seed, const HeavyOptions& heavy, int threads) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  GrowthReport r;
  r.model = model.name();
  r.delta = delta;
  r.m = m;
  r.replicas = replicas;
  r.horizon = horizon;
  r.lookahead = horizon;
  r.survival = survival_prob(model, horizon, replicas, seed, threads);
  const auto h = heavy_of(model, delta, m, heavy);
  r.heavy_prob = h.prob;
  r.heavy_site = h.site;
  r.heavy_exact = h.exact;
  const auto c = product_estimate(r.survival, r.heavy_prob);
  r.c_delta_hat = c.value;
  r.c_delta_se = c.se;
  r.bound = c.value * std::log1p(delta) / m;
  return r;
}

RateFit fit_growth(std::span<const double> times, std::span<const double> log_mass,
                   double tail_fraction) {
  if (times.size() != log_mass.size()) throw std::invalid_argument("times and masses differ in length");
  if (log_mass.size() < 2) throw std::invalid_argument("need at least two points to fit a rate");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw std::invalid_argument("tail fraction must be in (0, 1]");
  }
  if (log_mass.back() == -std::numeric_limits<double>::infinity()) {
    throw ExtinctError("no growth rate on an extinct trajectory");
  }
  const std::size_t n = log_mass.size();
  auto start = static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - tail_fraction)));
  start = std::min(start, n - 2);
  const std::size_t k = n - start;
  double mt = 0.0;
  double my = 0.0;
  for (std::size_t i = start; i < n; ++i) {
    mt += times[i];
    my += log_mass[i];
  }
  mt /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = start; i < n; ++i) {
    sxx += (times[i] - mt) * (times[i] - mt);
    sxy += (times[i] - mt) * (log_mass[i] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("degenerate time grid");
  RateFit f;
  f.rate = sxy / sxx;
  f.points = static_cast<int>(k);
  if (k > 2) {
    double rss = 0.0;
    for (std::size_t i = start; i < n; ++i) {
      const double r = log_mass[i] - my - f.rate * (times[i] - mt);
      rss += r * r;
    }
    f.se = std::sqrt(rss / static_cast<double>(k - 2) / sxx);
  }
  return f;
}

RateFit fit_growth(std::span<const double> log_mass, double tail_fraction) {
  std::vector<double> t(log_mass.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
  return fit_growth(t, log_mass, tail_fraction);
}

GrowthRun estimate_growth(const ModelSpec& model, const GrowthOptions& o) {
  model.validate();
  if (o.replicas < 1) throw std::invalid_argument("replicas must be >= 1");
  if (o.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (o.m < 1) throw std::invalid_argument("m must be >= 1");
  GrowthRun out;
  out.replicas = parallel_map(static_cast<std::size_t>(o.replicas), o.threads, [&](std::size_t i) {
    const int idx = static_cast<int>(i);
    switch (o.mode) {
      case MassMode::kLinear: return run_replica<LinearArith>(model, o, idx);
      case MassMode::kExact: return run_replica<ExactArith>(model, o, idx);
      case MassMode::kLog: break;
    }
    return run_replica<LogArith>(model, o, idx);
  });

  auto& r = out.report;
  r.model = model.name();
  r.delta = o.delta;
  r.m = o.m;
  r.replicas = o.replicas;
  r.horizon = o.horizon;
  r.lookahead = o.lookahead;
  r.tail_fraction = o.tail_fraction;
  r.tolerances = o.tolerances;

  int alive_l = 0;
  std::vector<double> rates;
  std::vector<double> cesaro;
  for (const auto& s : out.replicas) {
    alive_l += s.alive_lookahead ? 1 : 0;
    if (s.rate) rates.push_back(s.rate->rate);
    cesaro.push_back(cesaro_term(s.final_log_mass, o.horizon));
  }
  r.survival = binomial_estimate(alive_l, o.replicas);
  const auto h = heavy_of(model, o.delta, o.m, o.heavy);
  r.heavy_prob = h.prob;
  r.heavy_site = h.site;
  r.heavy_exact = h.exact;
  const auto c = product_estimate(r.survival, r.heavy_prob);
  r.c_delta_hat = c.value;
  r.c_delta_se = c.se;
  r.bound = c.value * std::log1p(o.delta) / o.m;
  if (!rates.empty()) r.fitted_rate = mean_estimate(rates);
  r.cesaro_log_mass = mean_estimate(cesaro).value;

  if (!model.is_product()) {
    bool inconclusive = false;
    std::string reason;
    const Estimate cs[] = {c};
    r.classifier = decide(r.survival, cs, two_site_condition(model), o.tolerances, inconclusive, reason);
  }
  return out;
}

Classification classify(const ModelSpec& model, std::span<const double> delta_grid, int horizon,
                        int replicas, std::uint64_t seed, const Tolerances& tol,
                        const HeavyOptions& heavy, int threads) {
  if (delta_grid.empty()) throw std::invalid_argument("empty delta grid");
  Classification c;
  c.survival = survival_prob(model, horizon, replicas, seed, threads);
  c.two_site = two_site_condition(model);
  for (double d : delta_grid) {
    c.deltas.push_back(d);
    c.c_hat.push_back(product_estimate(c.survival, heavy_of(model, d, 1, heavy).prob));
  }
  c.verdict = decide(c.survival, c.c_hat, c.two_site, tol, c.inconclusive, c.reason);
  return c;
}

nlohmann::json to_json(const Classification& c) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["verdict"] = verdict_name(c.verdict);
  j["inconclusive"] = c.inconclusive;
  j["reason"] = c.reason;
  j["survival"] = estimate_json(c.survival);
  j["two_site_condition"] = c.two_site;
  auto& arr = j["c_delta"] = nlohmann::json::array();
  for (std::size_t i = 0; i < c.deltas.size(); ++i) {
    arr.push_back({{"delta", c.deltas[i]}, {"c_hat", c.c_hat[i].value}, {"stderr", c.c_hat[i].se}});
  }
  return j;
}

namespace {

void count_paths(const Environment& env, int step, int n, const Site& at, const Site& x,
                 BigInt& count) {
  if (step == n) {
    if (at == x) ++count;
    return;
  }
  for (const auto& e : env.row(step + 1, at)) {
    if (e.value != 1.0) {
      throw NonBinaryKernelError("entry " + format_double(e.value) + " at step " +
                                 std::to_string(step + 1));
    }
    count_paths(env, step + 1, n, e.target, x, count);
  }
}

}  // namespace

BigInt brute_force_paths(const Environment& env, int n, const Site& x) {
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  if (n > 14) throw std::invalid_argument("brute force path count is limited to n <= 14");
  BigInt count = 0;
  count_paths(env, 0, n, Site::origin(env.dim()), x, count);
  return count;
}

}  // namespace lingrowth
