#pragma once

// The chain M_n = M_{n-1} B_n, restart chains M^{(m,x)} over the same
// environment, and open-path reachability.

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "lingrowth/core.hpp"
#include "lingrowth/kernels.hpp"

namespace lingrowth {

/// Environment given by explicit slices. Rows outside a slice's window, and
/// steps without a slice, are zero.
class ExplicitEnvironment : public Environment {
 public:
  ExplicitEnvironment(int dim, std::vector<KernelSlice> slices);

  int dim() const override { return dim_; }
  int range() const override { return range_; }
  void row(int step, const Site& x, std::vector<KernelEntry>& out) const override;
  using Environment::row;

  const std::vector<KernelSlice>& slices() const { return slices_; }

 private:
  int dim_;
  int range_ = 1;
  std::vector<KernelSlice> slices_;  // sorted by step
};

/// One step of the chain, reading rows straight from the environment.
/// Equivalent to apply_kernel(m, env.slice(n + 1, support(m))).
template <class Arith>
BasicMassField<Arith> advance_field(const Environment& env, const BasicMassField<Arith>& m) {
  using Entry = typename BasicMassField<Arith>::Entry;
  const int step = m.time_index() + 1;
  std::vector<Entry> contrib;
  std::vector<KernelEntry> row;
  for (const auto& e : m.entries()) {
    row.clear();
    env.row(step, e.site, row);
    for (const auto& k : row) contrib.push_back({k.target, Arith::scale(e.value, k.value)});
  }
  std::stable_sort(contrib.begin(), contrib.end(),
                   [](const Entry& a, const Entry& b) { return a.site < b.site; });
  std::vector<Entry> out;
  out.reserve(contrib.size());
  for (auto& c : contrib) {
    if (!out.empty() && out.back().site == c.site) {
      Arith::accumulate(out.back().value, c.value);
    } else {
      out.push_back(std::move(c));
    }
  }
  for (const auto& e : out) Arith::check(e.value);
  return BasicMassField<Arith>::from_entries(step, std::move(out));
}

template <class Arith>
struct BasicTrajectory {
  std::shared_ptr<const Environment> env;
  int horizon = 0;
  /// fields[n] for n = 0..horizon (empty after extinction).
  std::vector<BasicMassField<Arith>> fields;

  const BasicMassField<Arith>& at(int n) const { return fields.at(static_cast<std::size_t>(n)); }
};

using Trajectory = BasicTrajectory<LinearArith>;
using LogTrajectory = BasicTrajectory<LogArith>;
using ExactTrajectory = BasicTrajectory<ExactArith>;

template <class Arith>
BasicTrajectory<Arith> run(std::shared_ptr<const Environment> env, int horizon,
                           BasicMassField<Arith> start) {
  if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
  BasicTrajectory<Arith> t{std::move(env), horizon, {}};
  t.fields.reserve(static_cast<std::size_t>(horizon) + 1);
  t.fields.push_back(std::move(start));
  const int n0 = t.fields.front().time_index();
  for (int n = n0; n < n0 + horizon; ++n) {
    const auto& cur = t.fields.back();
    if (cur.empty()) {
      t.fields.emplace_back(n + 1);
    } else {
      t.fields.push_back(advance_field(*t.env, cur));
    }
  }
  return t;
}

/// The chain of a model from delta_o (or `start`) under a replica seed.
template <class Arith = LinearArith>
BasicTrajectory<Arith> run(const ModelSpec& model, std::uint64_t seed, int horizon) {
  return run<Arith>(std::make_shared<SampledEnvironment>(model, seed), horizon,
                    BasicMassField<Arith>::delta(Site::origin(model.dim)));
}

/// The process started from unit mass at (m, x), driven by the parent's slices.
template <class Arith>
struct BasicRestartHandle {
  int m = 0;
  Site x;
  /// fields[k] holds time m + k.
  std::vector<BasicMassField<Arith>> fields;

  const BasicMassField<Arith>& at(int n) const {
    return fields.at(static_cast<std::size_t>(n - m));
  }
  int last_time() const { return m + static_cast<int>(fields.size()) - 1; }
};

using RestartHandle = BasicRestartHandle<LinearArith>;

template <class Arith>
BasicRestartHandle<Arith> restart(const BasicTrajectory<Arith>& traj, int m, const Site& x) {
  if (m < 0 || m > traj.horizon) throw std::invalid_argument("restart time outside horizon");
  auto sub = run<Arith>(traj.env, traj.horizon - m, BasicMassField<Arith>::delta(x, m));
  return {m, x, std::move(sub.fields)};
}

/// |M_k| >= 1 for every k <= n.
template <class Arith>
bool alive(const BasicTrajectory<Arith>& traj, int n) {
  return !traj.at(n).empty();
}

template <class Arith>
bool alive(const BasicRestartHandle<Arith>& h, int n) {
  return !h.at(n).empty();
}

// ---------------------------------------------------------------------------
// Support-only propagation
// ---------------------------------------------------------------------------

/// Support of a restart chain, advanced one step at a time. Positivity of
/// mass is equivalent to open-path existence because nonzero entries are >= 1.
class SupportChain {
 public:
  SupportChain(int time, const Site& start) : time_(time), sites_{start} {}
  SupportChain(int time, std::vector<Site> sites);

  int time() const { return time_; }
  const std::vector<Site>& sites() const { return sites_; }
  bool empty() const { return sites_.empty(); }
  bool contains(const Site& y) const;

  void advance(const Environment& env);
  /// Advances to `time` or until extinction, whichever comes first.
  void advance_to(const Environment& env, int time);

 private:
  int time_;
  std::vector<Site> sites_;
  std::vector<Site> scratch_;
  std::vector<KernelEntry> row_;
};

/// (m, x) ~> (n, y): an open path links them. (m, x) ~> (m, x) by convention.
bool reaches(const Environment& env, int m, const Site& x, int n, const Site& y);

template <class Arith>
bool reaches(const BasicTrajectory<Arith>& traj, int m, const Site& x, int n, const Site& y) {
  return reaches(*traj.env, m, x, n, y);
}

/// The restart chain from (m, x) still has mass at time n.
bool alive_until(const Environment& env, int m, const Site& x, int n);

// ---------------------------------------------------------------------------
// Snapshots
// ---------------------------------------------------------------------------

std::string format_double(double v);

template <class Arith>
std::string format_mass(const typename Arith::Value& v) {
  if constexpr (std::is_same_v<Arith, ExactArith>) {
    return v.str();
  } else if constexpr (std::is_same_v<Arith, LogArith>) {
    return format_double(std::exp(v));
  } else {
    return format_double(v);
  }
}

/// Rows `n,total_mass,support_size,log_mass`, prefixed by `replica,` when
/// replica >= 0.
template <class Arith>
void write_snapshot_rows(std::ostream& os, std::span<const BasicMassField<Arith>> fields,
                         int replica = -1) {
  for (const auto& f : fields) {
    if (replica >= 0) os << replica << ',';
    os << f.time_index() << ',' << format_mass<Arith>(f.total()) << ',' << f.support_size() << ','
       << format_double(f.log_total()) << '\n';
  }
}

template <class Arith>
void write_snapshot_rows(std::ostream& os, const BasicTrajectory<Arith>& traj, int replica = -1) {
  write_snapshot_rows<Arith>(os, std::span<const BasicMassField<Arith>>(traj.fields), replica);
}

inline constexpr const char* kSnapshotHeader = "replica,n,total_mass,support_size,log_mass";

}  // namespace lingrowth
