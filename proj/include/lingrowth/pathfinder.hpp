#pragma once

// The recursive path gamma, its restarts gamma^{(m,v)}, percolation points
// under a finite lookahead, the open path Gamma and the good events G_n.

#include <cstdint>
#include <optional>
#include <ostream>
#include <unordered_map>
#include <vector>

#include "lingrowth/evolution.hpp"

namespace lingrowth {

class NoPercolationStartError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Rule : std::uint8_t { kStart, kHeavy, kLocal, kBacktrack, kReset };

/// "i".."v".
const char* rule_name(Rule r);

/// Percolation points approximated by survival over the next L steps.
class PercolationProxy {
 public:
  PercolationProxy(const Environment& env, int horizon, int lookahead);

  /// alive(restart(m, x), min(m + L, horizon)).
  bool operator()(int m, const Site& x) const;
  /// The verdict at m is horizon-clipped.
  bool truncated(int m) const { return m + lookahead_ > horizon_; }
  int lookahead() const { return lookahead_; }
  int horizon() const { return horizon_; }
  std::size_t cache_size() const { return cache_.size(); }

 private:
  struct Key {
    int m;
    Site x;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      return SiteHash{}(k.x) ^ (static_cast<std::size_t>(k.m) * 0x9e3779b97f4a7c15ULL);
    }
  };

  const Environment* env_;
  int horizon_;
  int lookahead_;
  mutable std::unordered_map<Key, bool, KeyHash> cache_;
};

/// Default lookahead: 20 times the kernel range.
int default_lookahead(const Environment& env);

struct PathTrace {
  int start_time = 0;
  int horizon = 0;
  Site heavy_offset;
  /// gamma[i] is the path at time start_time + i.
  std::vector<Site> gamma;
  std::vector<Rule> rule;
  /// T_n for steps that went through rule (iv), indexed like gamma.
  std::vector<std::optional<int>> t_back;

  int lookahead = 0;
  std::vector<int> tau;
  /// Proxy points whose restart dies before the next kept proxy point inside
  /// the horizon. They are left out of tau and cannot make a step good.
  std::vector<int> pruned;
  /// Gamma on [0, big_gamma.size()); empty if the start does not percolate.
  std::vector<Site> big_gamma;
  bool percolation_start = false;
  /// Some consecutive tau points were not linked; Gamma stops at the last link.
  /// Cannot happen after pruning; kept as a guard.
  bool proxy_gap = false;

  double delta = 0.0;
  /// good[n] for n = 0..horizon-1.
  std::vector<std::uint8_t> good;
  /// The proxy verdict behind good[n] was horizon-clipped.
  std::vector<std::uint8_t> good_truncated;

  const Site& gamma_at(int n) const { return gamma.at(static_cast<std::size_t>(n - start_time)); }
};

/// gamma^{(m, v)} on [m, horizon]. Backtracks never go before m and rule (v)
/// returns v.
PathTrace build_gamma_from(const Environment& env, int horizon, int m, const Site& v,
                           const Site& heavy_offset);

/// gamma = gamma^{(0, o)}.
PathTrace build_gamma(const Environment& env, int horizon, const Site& heavy_offset);

/// Fills tau, pruned and big_gamma. Throws NoPercolationStartError if
/// proxy(0, o) fails or the start itself gets pruned.
void build_big_gamma(PathTrace& trace, const Environment& env, const PercolationProxy& proxy);

/// Fills good and good_truncated:
/// good[n] = B_{n+1, gamma(n), gamma(n)+x} >= 1 + delta and proxy(n+1, gamma(n+1)),
/// with pruned points counting as proxy failures.
void good_events(PathTrace& trace, const Environment& env, double delta,
                 const PercolationProxy& proxy);

struct GoodFrequency {
  double frequency = 0.0;
  int counted = 0;
  int hits = 0;
};
/// Mean of good[n] over steps whose proxy verdict was not clipped.
GoodFrequency good_frequency(const PathTrace& trace);

/// Full pipeline on one environment: gamma, and when proxy(0, o) holds,
/// Gamma and the good events.
PathTrace trace_paths(const Environment& env, int horizon, const Site& heavy_offset, double delta,
                      int lookahead);

template <class Arith>
std::vector<typename Arith::Value> mass_along(const BasicTrajectory<Arith>& traj,
                                              std::span<const Site> path) {
  std::vector<typename Arith::Value> out;
  out.reserve(path.size());
  for (std::size_t n = 0; n < path.size(); ++n) {
    const auto* v = traj.at(static_cast<int>(n)).find(path[n]);
    out.push_back(v ? *v : Arith::zero());
  }
  return out;
}

/// Rows `n,gamma,rule,T_n,good,big_gamma,mass_at_big_gamma,log_mass_at_big_gamma`; coordinates are
/// ';'-joined, missing values empty. `log_mass` holds ln M_{n, Gamma(n)}.
void write_trace_csv(std::ostream& os, const PathTrace& trace, std::span<const double> log_mass);

}  // namespace lingrowth
