#include "lingrowth/pathfinder.hpp"

namespace lingrowth {

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::kStart: return "i";
    case Rule::kHeavy: return "ii";
    case Rule::kLocal: return "iii";
    case Rule::kBacktrack: return "iv";
    case Rule::kReset: return "v";
  }
  return "?";
}

PercolationProxy::PercolationProxy(const Environment& env, int horizon, int lookahead)
    : env_(&env), horizon_(horizon), lookahead_(lookahead) {
  if (lookahead < 1) throw std::invalid_argument("lookahead must be >= 1");
  if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
}

bool PercolationProxy::operator()(int m, const Site& x) const {
  const Key key{m, x};
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const bool v = alive_until(*env_, m, x, std::min(m + lookahead_, std::max(horizon_, m)));
  cache_.emplace(key, v);
  return v;
}

int default_lookahead(const Environment& env) {
  const int r = env.range();
  return 20 * (r > 0 ? r : 2);
}

namespace {

Site min_offset(std::span<const Site> sites, const Site& base) {
  Site best = sites.front() - base;
  SiteOrder order;
  for (const auto& s : sites.subspan(1)) {
    const Site off = s - base;
    if (order(off, best)) best = off;
  }
  return best;
}

}  // namespace

PathTrace build_gamma_from(const Environment& env, int horizon, int m, const Site& v,
                           const Site& heavy_offset) {
  if (m < 0 || m > horizon) throw std::invalid_argument("path start outside [0, horizon]");
  PathTrace t;
  t.start_time = m;
  t.horizon = horizon;
  t.heavy_offset = heavy_offset;
  const auto steps = static_cast<std::size_t>(horizon - m) + 1;
  t.gamma.reserve(steps);
  t.rule.reserve(steps);
  t.t_back.reserve(steps);
  t.gamma.push_back(v);
  t.rule.push_back(Rule::kStart);
  t.t_back.emplace_back();

  // Restart chains (k, gamma(k)) that were alive when last looked at. A dead
  // chain stays dead, so it is dropped for good.
  struct Chain {
    int k;
    SupportChain chain;
  };
  std::vector<Chain> stack;
  std::vector<KernelEntry> row;
  std::vector<Site> targets;

  for (int n = m; n < horizon; ++n) {
    const Site g = t.gamma.back();
    row.clear();
    env.row(n + 1, g, row);
    if (!row.empty()) {
      stack.push_back({n, SupportChain(n, g)});
      const Site want = g + heavy_offset;
      const bool heavy = std::any_of(row.begin(), row.end(),
                                     [&](const KernelEntry& e) { return e.target == want; });
      if (heavy) {
        t.gamma.push_back(want);
        t.rule.push_back(Rule::kHeavy);
      } else {
        targets.clear();
        for (const auto& e : row) targets.push_back(e.target);
        t.gamma.push_back(g + min_offset(targets, g));
        t.rule.push_back(Rule::kLocal);
      }
      t.t_back.emplace_back();
      continue;
    }
    while (!stack.empty()) {
      stack.back().chain.advance_to(env, n + 1);
      if (!stack.back().chain.empty()) break;
      stack.pop_back();
    }
    if (stack.empty()) {
      t.gamma.push_back(v);
      t.rule.push_back(Rule::kReset);
      t.t_back.emplace_back();
    } else {
      const int tn = stack.back().k;
      const Site base = t.gamma_at(tn);
      t.gamma.push_back(base + min_offset(stack.back().chain.sites(), base));
      t.rule.push_back(Rule::kBacktrack);
      t.t_back.emplace_back(tn);
    }
  }
  return t;
}

PathTrace build_gamma(const Environment& env, int horizon, const Site& heavy_offset) {
  return build_gamma_from(env, horizon, 0, Site::origin(env.dim()), heavy_offset);
}

void build_big_gamma(PathTrace& trace, const Environment& env, const PercolationProxy& proxy) {
  trace.lookahead = proxy.lookahead();
  trace.tau.clear();
  trace.pruned.clear();
  trace.big_gamma.clear();
  trace.proxy_gap = false;
  const int m = trace.start_time;
  trace.percolation_start = proxy(m, trace.gamma.front());
  if (!trace.percolation_start) {
    throw NoPercolationStartError("the start point does not percolate within the lookahead");
  }
  // Backward pass: a proxy point that cannot reach the next kept one has died
  // inside the horizon, so it is not a percolation point after all.
  for (int k = trace.horizon; k >= m; --k) {
    if (!proxy(k, trace.gamma_at(k))) continue;
    if (trace.tau.empty() ||
        reaches(env, k, trace.gamma_at(k), trace.tau.back(), trace.gamma_at(trace.tau.back()))) {
      trace.tau.push_back(k);
    } else {
      trace.pruned.push_back(k);
    }
  }
  std::reverse(trace.tau.begin(), trace.tau.end());
  std::reverse(trace.pruned.begin(), trace.pruned.end());
  if (trace.tau.front() != m) {
    trace.percolation_start = false;
    throw NoPercolationStartError("the start point dies inside the horizon");
  }
  trace.big_gamma.push_back(trace.gamma.front());
  std::vector<KernelEntry> row;
  std::vector<Site> cand;
  for (std::size_t i = 1; i < trace.tau.size(); ++i) {
    const int b = trace.tau[i];
    const Site target = trace.gamma_at(b);
    std::vector<Site> seg;
    Site prev = trace.big_gamma.back();
    bool ok = true;
    for (int k = trace.tau[i - 1] + 1; k < b && ok; ++k) {
      row.clear();
      env.row(k, prev, row);
      cand.clear();
      for (const auto& e : row) cand.push_back(e.target);
      std::sort(cand.begin(), cand.end(), SiteOrder{});
      ok = false;
      for (const auto& y : cand) {
        if (reaches(env, k, y, b, target)) {
          seg.push_back(y);
          prev = y;
          ok = true;
          break;
        }
      }
    }
    if (ok) ok = env.entry(b, prev, target) >= 1.0;
    if (!ok) {
      trace.proxy_gap = true;
      break;
    }
    trace.big_gamma.insert(trace.big_gamma.end(), seg.begin(), seg.end());
    trace.big_gamma.push_back(target);
  }
}

void good_events(PathTrace& trace, const Environment& env, double delta,
                 const PercolationProxy& proxy) {
  trace.delta = delta;
  trace.lookahead = proxy.lookahead();
  const auto steps = trace.gamma.size() - 1;
  trace.good.assign(steps, 0);
  trace.good_truncated.assign(steps, 0);
  std::vector<std::uint8_t> pruned(steps + 1, 0);
  for (int k : trace.pruned) pruned[static_cast<std::size_t>(k - trace.start_time)] = 1;
  for (std::size_t i = 0; i < steps; ++i) {
    const int n = trace.start_time + static_cast<int>(i);
    const Site& g = trace.gamma[i];
    trace.good_truncated[i] = proxy.truncated(n + 1) ? 1 : 0;
    if (env.entry(n + 1, g, g + trace.heavy_offset) >= 1.0 + delta && !pruned[i + 1]) {
      trace.good[i] = proxy(n + 1, trace.gamma[i + 1]) ? 1 : 0;
    }
  }
}

GoodFrequency good_frequency(const PathTrace& trace) {
  GoodFrequency f;
  for (std::size_t i = 0; i < trace.good.size(); ++i) {
    if (trace.good_truncated[i]) continue;
    ++f.counted;
    f.hits += trace.good[i];
  }
  f.frequency = f.counted ? static_cast<double>(f.hits) / f.counted : 0.0;
  return f;
}

PathTrace trace_paths(const Environment& env, int horizon, const Site& heavy_offset, double delta,
                      int lookahead) {
  PathTrace t = build_gamma(env, horizon, heavy_offset);
  PercolationProxy proxy(env, horizon, lookahead);
  try {
    build_big_gamma(t, env, proxy);
  } catch (const NoPercolationStartError&) {
    t.percolation_start = false;
  }
  good_events(t, env, delta, proxy);
  return t;
}

void write_trace_csv(std::ostream& os, const PathTrace& trace, std::span<const double> log_mass) {
  os << "n,gamma,rule,T_n,good,big_gamma,mass_at_big_gamma,log_mass_at_big_gamma\n";
  for (std::size_t i = 0; i < trace.gamma.size(); ++i) {
    os << trace.start_time + static_cast<int>(i) << ',' << trace.gamma[i].to_string() << ','
       << rule_name(trace.rule[i]) << ',';
    if (trace.t_back[i]) os << *trace.t_back[i];
    os << ',';
    if (i < trace.good.size()) os << static_cast<int>(trace.good[i]);
    os << ',';
    if (i < trace.big_gamma.size()) os << trace.big_gamma[i].to_string();
    os << ',';
    const bool has_mass = i < trace.big_gamma.size() && i < log_mass.size();
    if (has_mass) os << format_double(std::exp(log_mass[i]));
    os << ',';
    if (has_mass) os << format_double(log_mass[i]);
    os << '\n';
  }
}

}  // namespace lingrowth
