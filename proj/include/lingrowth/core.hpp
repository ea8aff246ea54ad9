#pragma once

// Lattice geometry, sparse mass fields and kernel slices.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace lingrowth {

inline constexpr int kMaxDim = 4;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class WindowTooSmallError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a linear-scale mass leaves the representable range.
class MassOverflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonIntegerEntryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Site
// ---------------------------------------------------------------------------

/// A point of Z^d, 1 <= d <= kMaxDim. Unused trailing coordinates are zero.
class Site {
 public:
  Site() = default;
  Site(std::initializer_list<int> coords);

  static Site origin(int dim);
  /// sign * e_axis
  static Site unit(int dim, int axis, int sign = 1);
  static Site from_coords(std::span<const int> coords);

  int dim() const { return dim_; }
  int operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  void set(int i, int v) { c_[static_cast<std::size_t>(i)] = v; }

  int linf() const;
  int l1() const;
  bool is_origin() const;

  Site operator+(const Site& o) const;
  Site operator-(const Site& o) const;
  Site operator-() const;
  Site scaled(int k) const;

  /// Storage order: plain lexicographic on coordinates. Not the Min order.
  friend auto operator<=>(const Site&, const Site&) = default;
  friend bool operator==(const Site&, const Site&) = default;

  /// Coordinates joined by ';' (CSV-safe).
  std::string to_string() const;
  std::vector<int> coords() const;

 private:
  std::array<std::int32_t, kMaxDim> c_{};
  std::uint8_t dim_ = 1;
};

struct SiteHash {
  std::size_t operator()(const Site& s) const noexcept;
};

/// The fixed enumeration of Z^d used for Min: L-infinity norm first,
/// then lexicographic on coordinates.
struct SiteOrder {
  bool operator()(const Site& a, const Site& b) const;
};

/// Throws std::invalid_argument on an empty set.
Site min_site(std::span<const Site> sites, SiteOrder order = {});

/// All sites with L-infinity norm < radius, in storage order.
std::vector<Site> linf_ball(int dim, int radius);

/// Sorts into storage order and removes duplicates.
void normalize_sites(std::vector<Site>& sites);

// ---------------------------------------------------------------------------
// Mass arithmetic policies
// ---------------------------------------------------------------------------

inline constexpr double kMassCeiling = 1e300;

struct LinearArith {
  using Value = double;
  static constexpr const char* kName = "linear";
  static Value zero() { return 0.0; }
  static Value one() { return 1.0; }
  static Value scale(const Value& m, double b) { return m * b; }
  static void accumulate(Value& acc, const Value& c) { acc += c; }
  static double log(const Value& v) { return std::log(v); }
  static bool at_least_one(const Value& v) { return v >= 1.0; }
  static void check(const Value& v) {
    if (!std::isfinite(v) || v > kMassCeiling) {
      throw MassOverflowError(
          "mass exceeded the floating-point ceiling; rerun with --log-mass");
    }
  }
};

double log_add_exp(double a, double b);

/// Masses stored as natural logarithms; "nonzero => >= 1" becomes "log >= 0".
struct LogArith {
  using Value = double;
  static constexpr const char* kName = "log";
  static Value zero() { return -std::numeric_limits<double>::infinity(); }
  static Value one() { return 0.0; }
  static Value scale(const Value& m, double b) { return m + std::log(b); }
  static void accumulate(Value& acc, const Value& c) { acc = log_add_exp(acc, c); }
  static double log(const Value& v) { return v; }
  static bool at_least_one(const Value& v) { return v >= 0.0; }
  static void check(const Value& v) {
    if (!std::isfinite(v)) throw MassOverflowError("non-finite log-mass");
  }
};

using BigInt = boost::multiprecision::cpp_int;

/// Exact big-integer masses; kernel entries must be integers.
struct ExactArith {
  using Value = BigInt;
  static constexpr const char* kName = "exact";
  static Value zero() { return 0; }
  static Value one() { return 1; }
  static Value scale(const Value& m, double b);
  static void accumulate(Value& acc, const Value& c) { acc += c; }
  static double log(const Value& v);
  static bool at_least_one(const Value& v) { return v >= 1; }
  static void check(const Value&) {}
};

// ---------------------------------------------------------------------------
// MassField
// ---------------------------------------------------------------------------

/// Sparse nonnegative row vector M_n. Only sites with nonzero mass are stored,
/// sorted in storage order.
template <class Arith>
class BasicMassField {
 public:
  using Value = typename Arith::Value;
  struct Entry {
    Site site;
    Value value;
  };

  BasicMassField() = default;
  explicit BasicMassField(int time_index) : n_(time_index) {}

  static BasicMassField delta(const Site& x, int time_index = 0) {
    BasicMassField f(time_index);
    f.entries_.push_back({x, Arith::one()});
    return f;
  }

  /// Entries must have distinct sites. Values must represent masses >= 1.
  static BasicMassField from_entries(int time_index, std::vector<Entry> entries) {
    auto by_site = [](const Entry& a, const Entry& b) { return a.site < b.site; };
    if (!std::is_sorted(entries.begin(), entries.end(), by_site)) {
      std::sort(entries.begin(), entries.end(), by_site);
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (i > 0 && entries[i].site == entries[i - 1].site) {
        throw std::invalid_argument("duplicate site in mass field");
      }
      if (!Arith::at_least_one(entries[i].value)) {
        throw std::invalid_argument("mass field value below 1 at " +
                                    entries[i].site.to_string());
      }
    }
    BasicMassField f(time_index);
    f.entries_ = std::move(entries);
    return f;
  }

  int time_index() const { return n_; }
  std::span<const Entry> entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t support_size() const { return entries_.size(); }

  const Value* find(const Site& x) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), x,
                               [](const Entry& e, const Site& s) { return e.site < s; });
    if (it == entries_.end() || it->site != x) return nullptr;
    return &it->value;
  }

  std::vector<Site> support() const {
    std::vector<Site> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.site);
    return out;
  }

  Value total() const {
    Value acc = Arith::zero();
    for (const auto& e : entries_) Arith::accumulate(acc, e.value);
    return acc;
  }

  /// log |M|; -inf when empty.
  double log_total() const {
    if (entries_.empty()) return -std::numeric_limits<double>::infinity();
    return Arith::log(total());
  }

  double log_at(const Site& x) const {
    const Value* v = find(x);
    return v ? Arith::log(*v) : -std::numeric_limits<double>::infinity();
  }

 private:
  int n_ = 0;
  std::vector<Entry> entries_;
};

using MassField = BasicMassField<LinearArith>;
using LogMassField = BasicMassField<LogArith>;
using ExactMassField = BasicMassField<ExactArith>;

inline double total_mass(const MassField& m) { return m.total(); }

// ---------------------------------------------------------------------------
// KernelSlice
// ---------------------------------------------------------------------------

struct KernelEntry {
  Site target;
  double value;
};

/// One time step's matrix B_n restricted to a finite set of source rows.
/// Nonzero entries are >= 1 and satisfy linf(target - source) < range.
class KernelSlice {
 public:
  struct Row {
    Site source;
    std::vector<KernelEntry> entries;
  };

  KernelSlice() = default;
  /// Zero entries are dropped; rows may come in any order.
  KernelSlice(int step, int range, std::vector<Row> rows);

  static KernelSlice identity(int step, std::span<const Site> window);

  int step() const { return step_; }
  int range() const { return range_; }
  std::span<const Site> window() const { return window_; }
  bool covers(const Site& x) const;
  /// Empty span when x is outside the window or its row is zero.
  std::span<const KernelEntry> row(const Site& x) const;
  double entry(const Site& x, const Site& y) const;
  std::size_t nonzero_count() const { return entries_.size(); }
  double max_row_sum() const;

 private:
  int step_ = 1;
  int range_ = 1;
  std::vector<Site> window_;
  std::vector<std::size_t> offsets_;  // CSR row starts, size window_.size() + 1
  std::vector<KernelEntry> entries_;
};

/// M' = M B. Requires B.step() == M.time_index() + 1 and the window to cover
/// the support of M.
template <class Arith>
BasicMassField<Arith> apply_kernel(const BasicMassField<Arith>& m, const KernelSlice& b) {
  using Entry = typename BasicMassField<Arith>::Entry;
  if (b.step() != m.time_index() + 1) {
    throw std::invalid_argument("kernel step " + std::to_string(b.step()) +
                                " does not follow field time " +
                                std::to_string(m.time_index()));
  }
  std::vector<Entry> contrib;
  for (const auto& e : m.entries()) {
    if (!b.covers(e.site)) {
      throw WindowTooSmallError("kernel slice window misses support site " +
                                e.site.to_string());
    }
    for (const auto& k : b.row(e.site)) {
      contrib.push_back({k.target, Arith::scale(e.value, k.value)});
    }
  }
  std::stable_sort(contrib.begin(), contrib.end(),
                   [](const Entry& a, const Entry& c) { return a.site < c.site; });
  std::vector<Entry> out;
  for (auto& c : contrib) {
    if (!out.empty() && out.back().site == c.site) {
      Arith::accumulate(out.back().value, c.value);
    } else {
      out.push_back(std::move(c));
    }
  }
  for (const auto& e : out) Arith::check(e.value);
  return BasicMassField<Arith>::from_entries(b.step(), std::move(out));
}

}  // namespace lingrowth
