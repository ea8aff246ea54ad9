#pragma once

// Kernel distributions and their lazily materialized realizations.
//
// Every base model is described by an independence unit (a column for LSE
// variants, a row for DLSE variants) whose realization is a short list of
// (offset, value) pairs. For a column unit at y the pair (e, v) means
// B_{y-e, y} = v; for a row unit at x it means B_{x, x+e} = v. Units are
// drawn from counter-based streams keyed by (seed, step, unit site).

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "lingrowth/core.hpp"

namespace lingrowth {

class NoHeavyEntryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Orientation { kColumn, kRow };

struct UnitEntry {
  Site offset;
  double value;
  friend bool operator==(const UnitEntry&, const UnitEntry&) = default;
};
using UnitRealization = std::vector<UnitEntry>;

struct UnitOutcome {
  double prob;
  UnitRealization entries;
};
/// Finite law of one independence unit.
using UnitLaw = std::vector<UnitOutcome>;

/// Merges identical realizations, drops zero-probability outcomes and sorts.
void canonicalize(UnitLaw& law);

struct ModelSpec;

/// Example 1, site version: A_{x,y} = eta_y 1{|x-y|_1 = 1}.
struct SiteOP {
  double p;
};
/// Example 1, bond version: A_{x,y} = eta_{(x,y)} 1{|x-y|_1 = 1}.
struct BondOP {
  double p;
};
/// Binary contact path process, columns independent (the site at n+1 picks a source).
struct BcppLse {
  double p;
  double q;
};
/// Binary contact path process, rows independent (the site at n picks a target).
struct BcppDlse {
  double p;
  double q;
};
/// Each neighbourhood entry independently equals v with probability p.
struct WeightedBernoulli {
  double p;
  double v;
  std::vector<Site> neighborhood;
};
/// Explicit finite law for one column or one row.
struct TableModel {
  Orientation orientation;
  UnitLaw outcomes;
};
/// m consecutive base matrices multiplied together.
struct ProductModel {
  std::shared_ptr<const ModelSpec> base;
  int m;
};

struct ModelSpec {
  std::variant<SiteOP, BondOP, BcppLse, BcppDlse, WeightedBernoulli, TableModel, ProductModel>
      variant;
  int dim = 1;

  static ModelSpec site_op(double p, int dim = 1);
  static ModelSpec bond_op(double p, int dim = 1);
  static ModelSpec bcpp_lse(double p, double q, int dim = 1);
  static ModelSpec bcpp_dlse(double p, double q, int dim = 1);
  /// Empty neighbourhood means the 2d nearest neighbours.
  static ModelSpec weighted_bernoulli(double p, double v, std::vector<Site> neighborhood = {},
                                      int dim = 1);
  static ModelSpec table(Orientation orientation, UnitLaw outcomes, int dim = 1);
  static ModelSpec product(ModelSpec base, int m);

  /// Entries vanish when linf(x - y) >= range().
  int range() const;
  bool is_product() const { return std::holds_alternative<ProductModel>(variant); }
  /// For products, the base's orientation.
  Orientation orientation() const;
  /// Throws std::invalid_argument on parameters outside their domain.
  void validate() const;
  std::string name() const;
  const ModelSpec& base() const;
  int block_length() const;
};

/// ±e_i in storage order.
const std::vector<Site>& nearest_neighbors(int dim);

UnitLaw unit_law(const ModelSpec& model);
/// Draws the unit at (step, site) directly from the keyed stream.
UnitRealization sample_unit(const ModelSpec& model, std::uint64_t seed, int step,
                            const Site& site);
/// Offsets that can carry a nonzero entry in some realization, in storage order.
std::vector<Site> possible_offsets(const ModelSpec& model);
bool is_binary(const ModelSpec& model);

/// LSE: some column has two nonzero entries with positive probability.
/// DLSE: the same for rows.
bool two_site_condition(const ModelSpec& model);

// ---------------------------------------------------------------------------
// Environments
// ---------------------------------------------------------------------------

/// A realized sequence B_1, B_2, ... exposed row by row.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual int dim() const = 0;
  /// 0 when no finite range is known.
  virtual int range() const = 0;
  /// Appends the nonzero entries of row x of B_step, sorted by target.
  virtual void row(int step, const Site& x, std::vector<KernelEntry>& out) const = 0;

  std::vector<KernelEntry> row(int step, const Site& x) const;
  double entry(int step, const Site& x, const Site& y) const;
  KernelSlice slice(int step, std::span<const Site> window) const;
};

/// The environment of a ModelSpec under a replica seed. Product models are
/// materialized block by block from the base environment with the same seed
/// and memoized.
class SampledEnvironment : public Environment {
 public:
  SampledEnvironment(ModelSpec model, std::uint64_t seed);

  int dim() const override { return model_.dim; }
  int range() const override { return range_; }
  void row(int step, const Site& x, std::vector<KernelEntry>& out) const override;
  using Environment::row;

  const ModelSpec& model() const { return model_; }
  std::uint64_t seed() const { return seed_; }

 private:
  struct RowKey {
    int step;
    Site x;
    friend bool operator==(const RowKey&, const RowKey&) = default;
  };
  struct RowKeyHash {
    std::size_t operator()(const RowKey& k) const noexcept {
      return SiteHash{}(k.x) ^ (static_cast<std::size_t>(k.step) * 0x9e3779b97f4a7c15ULL);
    }
  };

  ModelSpec model_;
  std::uint64_t seed_;
  int range_;
  std::vector<Site> offsets_;
  std::unique_ptr<SampledEnvironment> base_;
  mutable std::unordered_map<RowKey, std::vector<KernelEntry>, RowKeyHash> product_rows_;
};

/// Assembles row x of a base model from a unit lookup. Shared by the sampled
/// environment and by exhaustive enumeration.
template <class UnitLookup>
void assemble_row(Orientation orientation, std::span<const Site> offsets, const Site& x,
                  UnitLookup&& unit_at, std::vector<KernelEntry>& out) {
  if (orientation == Orientation::kRow) {
    const UnitRealization& unit = unit_at(x);
    for (const auto& e : unit) {
      if (e.value != 0.0) out.push_back({x + e.offset, e.value});
    }
    return;
  }
  for (const auto& off : offsets) {
    const Site y = x + off;
    const UnitRealization& unit = unit_at(y);
    for (const auto& e : unit) {
      if (e.offset == off) {
        if (e.value != 0.0) out.push_back({y, e.value});
        break;
      }
    }
  }
}

/// Slice of B_step on window x (window dilated by range).
KernelSlice sample_slice(const ModelSpec& model, std::uint64_t seed, int step,
                         std::span<const Site> window);
/// Product of the m base slices of block `block` (base steps (block-1)m+1 .. block m).
KernelSlice product_slice(const ModelSpec& product, std::uint64_t seed, int block,
                          std::span<const Site> window);

// ---------------------------------------------------------------------------
// Heavy entries
// ---------------------------------------------------------------------------

struct HeavySiteInfo {
  Site site;
  double delta = 0.0;
  double prob = 0.0;
  double stderr_prob = 0.0;
  bool exact = true;
};

struct HeavyOptions {
  double epsilon = 0.0;
  /// Joint outcome budget for exact enumeration of product kernels.
  std::uint64_t enumeration_budget = 1ULL << 20;
  int mc_samples = 20000;
  std::uint64_t mc_seed = 0x5eed;
};

/// P(B_{o,x} >= threshold) for every offset x that can carry an entry, in
/// storage order. Exact for base models and for products within the
/// enumeration budget; Monte Carlo otherwise (then `exact` is false).
struct EntryTailLaw {
  std::vector<Site> sites;
  std::vector<double> prob;
  std::vector<double> stderr_prob;
  bool exact = true;
};
EntryTailLaw entry_tail_law(const ModelSpec& model, double threshold,
                            const HeavyOptions& options = {});

/// The site maximizing P(B_{o,x} >= 1 + delta), ties broken by SiteOrder.
/// With epsilon > 0, the first site in SiteOrder within epsilon of the sup.
/// Throws NoHeavyEntryError when the probability vanishes everywhere.
HeavySiteInfo heavy_site(const ModelSpec& model, double delta, const HeavyOptions& options = {});

/// Direction preferred by the path construction: the heavy site when one
/// exists, otherwise the site maximizing P(B_{o,x} >= 1).
Site preferred_offset(const ModelSpec& model, double delta, const HeavyOptions& options = {});

}  // namespace lingrowth
