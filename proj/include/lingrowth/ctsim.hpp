#pragma once

// Continuous-time linear systems driven by exponential clocks, their duals,
// and the unit-time discretization that turns them into kernel slices.
//
// Site z rings at tau^{z,1}, tau^{z,1} + tau^{z,2}, ... and uses the jump
// vector K^{z,i} at its i-th ring. Both are keyed by (seed, z, i), so the
// same randomness is seen whatever set of sites is being simulated.

#include <cstdint>
#include <ostream>
#include <queue>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lingrowth/core.hpp"
#include "lingrowth/estimator.hpp"
#include "lingrowth/evolution.hpp"
#include "lingrowth/kernels.hpp"
#include "lingrowth/rng.hpp"

namespace lingrowth {

/// Law of the jump vector K = (K_x), a finite list of joint outcomes.
struct CtKernel {
  int dim = 1;
  UnitLaw law;

  static CtKernel from_law(int dim, UnitLaw law);
  static CtKernel deterministic(int dim, UnitRealization k);

  /// K_x = 0 whenever linf(x) >= range().
  int range() const;
  /// Offsets that can be nonzero, storage order.
  std::vector<Site> offsets() const;
  void validate() const;

  UnitRealization sample(std::uint64_t seed, const Site& z, int i) const;
  /// P(sum_x K_x > 1) and P(sum_x K_x == 1).
  double prob_sum_above_one() const;
  double prob_sum_equal_one() const;
  bool integer_valued() const;
};

/// Value of K at an offset within one realization.
double k_at(const UnitRealization& k, const Site& offset);

/// Lazily materialized ring times.
class ClockBank {
 public:
  explicit ClockBank(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  /// tau^{z,i}, i >= 1.
  double gap(const Site& z, int i) const;
  /// tau^{z,1} + ... + tau^{z,i}.
  double ring(const Site& z, int i) const;
  /// Smallest i with ring(z, i) > t.
  int first_after(const Site& z, double t) const;

 private:
  std::uint64_t seed_;
  mutable std::unordered_map<Site, std::vector<double>, SiteHash> rings_;
};

struct CtEvent {
  double t;
  Site z;
  int i;
  bool noop;
  double k_sum;
};

struct CtOptions {
  bool log_events = false;
  /// Sites whose clocks are processed even when they cannot change anything.
  std::vector<Site> silent_sites;
};

template <class Arith>
struct BasicCtRun {
  int t0 = 0;
  double t_end = 0.0;
  /// Fields at integer times t0, t0 + 1, ..., floor(t_end).
  std::vector<BasicMassField<Arith>> snapshots;
  std::vector<CtEvent> events;
  std::size_t event_count = 0;
  std::size_t noop_count = 0;
};

using CtRun = BasicCtRun<LinearArith>;

enum class CtProcess { kY, kZ };

namespace detail {

struct QueuedRing {
  double t;
  Site z;
  int i;
  bool operator>(const QueuedRing& o) const {
    if (t != o.t) return t > o.t;
    return o.z < z;
  }
};

template <class Arith>
BasicMassField<Arith> to_field(int time,
                               const std::unordered_map<Site, typename Arith::Value, SiteHash>& m) {
  std::vector<typename BasicMassField<Arith>::Entry> e;
  e.reserve(m.size());
  for (const auto& [s, v] : m) e.push_back({s, v});
  std::sort(e.begin(), e.end(), [](const auto& a, const auto& b) { return a.site < b.site; });
  return BasicMassField<Arith>::from_entries(time, std::move(e));
}

}  // namespace detail

/// Event-driven simulation of Y (update rule) or Z (transposed rule) from
/// `start` (taken at time start.time_index()) up to t_end. Only clocks that
/// can change the field are processed, plus the silent sites.
template <class Arith>
BasicCtRun<Arith> ct_run(CtProcess process, const CtKernel& kernel, const ClockBank& clocks,
                         const BasicMassField<Arith>& start, double t_end,
                         const CtOptions& opts = {}) {
  using Value = typename Arith::Value;
  const int t0 = start.time_index();
  if (!(t_end >= t0)) throw std::invalid_argument("t_end before the start time");
  BasicCtRun<Arith> out;
  out.t0 = t0;
  out.t_end = t_end;

  std::unordered_map<Site, Value, SiteHash> field;
  for (const auto& e : start.entries()) field.emplace(e.site, e.value);
  std::unordered_set<Site, SiteHash> silent(opts.silent_sites.begin(), opts.silent_sites.end());
  std::unordered_set<Site, SiteHash> scheduled;
  std::priority_queue<detail::QueuedRing, std::vector<detail::QueuedRing>, std::greater<>> queue;

  const std::vector<Site> ball = linf_ball(kernel.dim, kernel.range());

  auto schedule = [&](const Site& z, double after) {
    if (!scheduled.insert(z).second) return;
    const int i = clocks.first_after(z, after);
    queue.push({clocks.ring(z, i), z, i});
  };
  // Y changes only at sites carrying mass; Z at sites within range of mass.
  auto near_mass = [&](const Site& z) {
    if (process == CtProcess::kY) return field.count(z) > 0;
    for (const auto& b : ball) {
      if (field.count(z + b)) return true;
    }
    return false;
  };
  auto relevant = [&](const Site& z) { return silent.count(z) > 0 || near_mass(z); };
  auto activate = [&](const Site& x, double t) {
    if (process == CtProcess::kY) {
      schedule(x, t);
    } else {
      for (const auto& b : ball) schedule(x - b, t);
    }
  };

  for (const auto& e : start.entries()) activate(e.site, t0);
  for (const auto& s : opts.silent_sites) schedule(s, t0);

  int next_snapshot = t0;
  const int last_snapshot = static_cast<int>(std::floor(t_end));
  auto emit_until = [&](double t) {
    while (next_snapshot <= last_snapshot && next_snapshot < t) {
      out.snapshots.push_back(detail::to_field<Arith>(next_snapshot, field));
      ++next_snapshot;
    }
  };

  auto set_value = [&](const Site& x, const Value& v, double t) {
    if (v == Arith::zero()) {
      field.erase(x);
      return;
    }
    Arith::check(v);
    if (field.insert_or_assign(x, v).second) activate(x, t);
  };
  auto add_value = [&](const Site& x, const Value& v, double t) {
    if (v == Arith::zero()) return;
    auto it = field.find(x);
    if (it != field.end()) {
      Arith::accumulate(it->second, v);
      Arith::check(it->second);
    } else {
      Arith::check(v);
      field.emplace(x, v);
      activate(x, t);
    }
  };

  while (!queue.empty() && queue.top().t <= t_end) {
    const auto ev = queue.top();
    queue.pop();
    emit_until(ev.t);
    ++out.event_count;
    bool noop = true;
    double k_sum = 0.0;
    if (process == CtProcess::kY) {
      auto it = field.find(ev.z);
      if (it != field.end()) {
        const UnitRealization k = kernel.sample(clocks.seed(), ev.z, ev.i);
        const Value y = it->second;
        Value self = Arith::zero();
        for (const auto& e : k) {
          k_sum += e.value;
          if (e.offset.is_origin()) self = Arith::scale(y, e.value);
          else add_value(ev.z + e.offset, Arith::scale(y, e.value), ev.t);
        }
        set_value(ev.z, self, ev.t);
        noop = false;
      }
    } else if (near_mass(ev.z)) {
      const UnitRealization k = kernel.sample(clocks.seed(), ev.z, ev.i);
      Value acc = Arith::zero();
      for (const auto& e : k) {
        k_sum += e.value;
        auto it = field.find(ev.z + e.offset);
        if (it != field.end()) Arith::accumulate(acc, Arith::scale(it->second, e.value));
      }
      set_value(ev.z, acc, ev.t);
      noop = false;
    }
    if (noop) ++out.noop_count;
    if (opts.log_events) out.events.push_back({ev.t, ev.z, ev.i, noop, k_sum});
    scheduled.erase(ev.z);
    if (relevant(ev.z)) {
      scheduled.insert(ev.z);
      queue.push({clocks.ring(ev.z, ev.i + 1), ev.z, ev.i + 1});
    }
  }
  emit_until(std::numeric_limits<double>::infinity());
  return out;
}

template <class Arith = LinearArith>
BasicCtRun<Arith> ct_run_y(const CtKernel& kernel, std::uint64_t seed,
                           const BasicMassField<Arith>& y0, double t_end,
                           const CtOptions& opts = {}) {
  ClockBank clocks(seed);
  return ct_run<Arith>(CtProcess::kY, kernel, clocks, y0, t_end, opts);
}

template <class Arith = LinearArith>
BasicCtRun<Arith> ct_run_z(const CtKernel& kernel, std::uint64_t seed,
                           const BasicMassField<Arith>& z0, double t_end,
                           const CtOptions& opts = {}) {
  ClockBank clocks(seed);
  return ct_run<Arith>(CtProcess::kZ, kernel, clocks, z0, t_end, opts);
}

/// B_{n+1, x, y} = Y^{(n, x)}_{n+1, y} for x in the window, all rows driven by
/// the same clocks and jump vectors.
KernelSlice ct_discretize(const CtKernel& kernel, const ClockBank& clocks, int n,
                          std::span<const Site> window);
KernelSlice ct_discretize(const CtKernel& kernel, std::uint64_t seed, int n,
                          std::span<const Site> window);

/// The discretized chain as an environment; rows are simulated on demand and
/// memoized. Not thread-safe.
class CtDiscretizedEnvironment : public Environment {
 public:
  CtDiscretizedEnvironment(CtKernel kernel, std::uint64_t seed);

  int dim() const override { return kernel_.dim; }
  int range() const override { return 0; }
  void row(int step, const Site& x, std::vector<KernelEntry>& out) const override;
  using Environment::row;

 private:
  struct Key {
    int step;
    Site x;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      return SiteHash{}(k.x) ^ (static_cast<std::size_t>(k.step) * 0x9e3779b97f4a7c15ULL);
    }
  };

  CtKernel kernel_;
  ClockBank clocks_;
  mutable std::unordered_map<Key, std::vector<KernelEntry>, KeyHash> rows_;
};

struct CtClassification {
  double prob_sum_above_one = 0.0;
  double prob_sum_equal_one = 0.0;
  bool coalescing = false;
  Verdict verdict = Verdict::kCase3;
  std::string reason;
};

/// Growth on survival iff P(sum K > 1) > 0; read off the law, no simulation.
CtClassification ct_classify(const CtKernel& kernel);

/// Rows `t,site,i,noop,k_sum`.
void write_event_csv(std::ostream& os, std::span<const CtEvent> events);

}  // namespace lingrowth
