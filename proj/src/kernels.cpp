#include "lingrowth/kernels.hpp"

#include <cmath>
#include <array>
#include <sstream>

#include "lingrowth/rng.hpp"

namespace lingrowth {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool valid_weight(double v) { return v == 0.0 || (v >= 1.0 && std::isfinite(v)); }

void check_prob(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  }
}

bool realization_less(const UnitRealization& a, const UnitRealization& b) {
  return std::lexicographical_compare(
      a.begin(), a.end(), b.begin(), b.end(), [](const UnitEntry& x, const UnitEntry& y) {
        if (x.offset != y.offset) return x.offset < y.offset;
        return x.value < y.value;
      });
}

void sort_realization(UnitRealization& r) {
  std::sort(r.begin(), r.end(),
            [](const UnitEntry& a, const UnitEntry& b) { return a.offset < b.offset; });
}

UnitLaw bernoulli_subsets(double p, double value, const std::vector<Site>& offsets) {
  UnitLaw law;
  const std::size_t k = offsets.size();
  for (std::uint64_t mask = 0; mask < (1ULL << k); ++mask) {
    UnitOutcome o{1.0, {}};
    for (std::size_t i = 0; i < k; ++i) {
      if (mask & (1ULL << i)) {
        o.prob *= p;
        o.entries.push_back({offsets[i], value});
      } else {
        o.prob *= 1.0 - p;
      }
    }
    law.push_back(std::move(o));
  }
  return law;
}

UnitLaw bcpp_law(double p, double q, int dim) {
  UnitLaw law;
  const auto& nn = nearest_neighbors(dim);
  const double pe = 1.0 / static_cast<double>(nn.size());
  for (int eta = 0; eta <= 1; ++eta) {
    for (int zeta = 0; zeta <= 1; ++zeta) {
      for (const auto& e : nn) {
        UnitOutcome o{(eta ? p : 1.0 - p) * (zeta ? q : 1.0 - q) * pe, {}};
        if (zeta) o.entries.push_back({Site::origin(dim), 1.0});
        if (eta) o.entries.push_back({e, 1.0});
        law.push_back(std::move(o));
      }
    }
  }
  return law;
}

UnitRealization draw_bcpp(rng::Stream& s, double p, double q, int dim) {
  const auto& nn = nearest_neighbors(dim);
  const bool eta = s.bernoulli(p);
  const bool zeta = s.bernoulli(q);
  const Site e = nn[static_cast<std::size_t>(s.below(static_cast<int>(nn.size())))];
  UnitRealization r;
  if (zeta) r.push_back({Site::origin(dim), 1.0});
  if (eta) r.push_back({e, 1.0});
  sort_realization(r);
  return r;
}

}  // namespace

void canonicalize(UnitLaw& law) {
  for (auto& o : law) sort_realization(o.entries);
  std::erase_if(law, [](const UnitOutcome& o) { return o.prob <= 0.0; });
  for (auto& o : law) {
    std::erase_if(o.entries, [](const UnitEntry& e) { return e.value == 0.0; });
  }
  std::stable_sort(law.begin(), law.end(), [](const UnitOutcome& a, const UnitOutcome& b) {
    return realization_less(a.entries, b.entries);
  });
  UnitLaw merged;
  for (auto& o : law) {
    if (!merged.empty() && merged.back().entries == o.entries) {
      merged.back().prob += o.prob;
    } else {
      merged.push_back(std::move(o));
    }
  }
  law = std::move(merged);
}

const std::vector<Site>& nearest_neighbors(int dim) {
  static const auto table = [] {
    std::array<std::vector<Site>, kMaxDim + 1> t;
    for (int d = 1; d <= kMaxDim; ++d) {
      for (int i = 0; i < d; ++i) {
        t[static_cast<std::size_t>(d)].push_back(Site::unit(d, i, -1));
        t[static_cast<std::size_t>(d)].push_back(Site::unit(d, i, +1));
      }
      normalize_sites(t[static_cast<std::size_t>(d)]);
    }
    return t;
  }();
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension out of range");
  return table[static_cast<std::size_t>(dim)];
}

// ---------------------------------------------------------------------------

ModelSpec ModelSpec::site_op(double p, int dim) { return {SiteOP{p}, dim}; }
ModelSpec ModelSpec::bond_op(double p, int dim) { return {BondOP{p}, dim}; }
ModelSpec ModelSpec::bcpp_lse(double p, double q, int dim) { return {BcppLse{p, q}, dim}; }
ModelSpec ModelSpec::bcpp_dlse(double p, double q, int dim) { return {BcppDlse{p, q}, dim}; }

ModelSpec ModelSpec::weighted_bernoulli(double p, double v, std::vector<Site> neighborhood,
                                        int dim) {
  if (neighborhood.empty()) {
    neighborhood = nearest_neighbors(dim);
  } else {
    dim = neighborhood.front().dim();
  }
  normalize_sites(neighborhood);
  return {WeightedBernoulli{p, v, std::move(neighborhood)}, dim};
}

ModelSpec ModelSpec::table(Orientation orientation, UnitLaw outcomes, int dim) {
  return {TableModel{orientation, std::move(outcomes)}, dim};
}

ModelSpec ModelSpec::product(ModelSpec base, int m) {
  const int dim = base.dim;
  return {ProductModel{std::make_shared<const ModelSpec>(std::move(base)), m}, dim};
}

int ModelSpec::range() const {
  return std::visit(
      Overloaded{
          [](const SiteOP&) { return 2; },
          [](const BondOP&) { return 2; },
          [](const BcppLse&) { return 2; },
          [](const BcppDlse&) { return 2; },
          [](const WeightedBernoulli& w) {
            int r = 0;
            for (const auto& s : w.neighborhood) r = std::max(r, s.linf());
            return r + 1;
          },
          [](const TableModel& t) {
            int r = 0;
            for (const auto& o : t.outcomes) {
              for (const auto& e : o.entries) r = std::max(r, e.offset.linf());
            }
            return r + 1;
          },
          [](const ProductModel& p) { return p.m * (p.base->range() - 1) + 1; },
      },
      variant);
}

Orientation ModelSpec::orientation() const {
  return std::visit(Overloaded{
                        [](const BcppDlse&) { return Orientation::kRow; },
                        [](const TableModel& t) { return t.orientation; },
                        [](const ProductModel& p) { return p.base->orientation(); },
                        [](const auto&) { return Orientation::kColumn; },
                    },
                    variant);
}

const ModelSpec& ModelSpec::base() const {
  if (const auto* p = std::get_if<ProductModel>(&variant)) return *p->base;
  return *this;
}

int ModelSpec::block_length() const {
  if (const auto* p = std::get_if<ProductModel>(&variant)) return p->m;
  return 1;
}

void ModelSpec::validate() const {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension out of range");
  std::visit(Overloaded{
                 [](const SiteOP& m) { check_prob(m.p, "p"); },
                 [](const BondOP& m) { check_prob(m.p, "p"); },
                 [](const BcppLse& m) {
                   check_prob(m.p, "p");
                   check_prob(m.q, "q");
                 },
                 [](const BcppDlse& m) {
                   check_prob(m.p, "p");
                   check_prob(m.q, "q");
                 },
                 [this](const WeightedBernoulli& m) {
                   check_prob(m.p, "p");
                   if (!valid_weight(m.v)) throw std::invalid_argument("v must be 0 or >= 1");
                   if (m.neighborhood.empty()) {
                     throw std::invalid_argument("empty neighbourhood");
                   }
                   for (const auto& s : m.neighborhood) {
                     if (s.dim() != dim) throw std::invalid_argument("neighbourhood dimension");
                   }
                 },
                 [this](const TableModel& t) {
                   if (t.outcomes.empty()) throw std::invalid_argument("empty table");
                   double total = 0.0;
                   for (const auto& o : t.outcomes) {
                     if (!(o.prob >= 0.0)) throw std::invalid_argument("negative probability");
                     total += o.prob;
                     for (const auto& e : o.entries) {
                       if (!valid_weight(e.value)) {
                         throw std::invalid_argument("table entries must be 0 or >= 1");
                       }
                       if (e.offset.dim() != dim) {
                         throw std::invalid_argument("table offset dimension");
                       }
                     }
                   }
                   if (std::abs(total - 1.0) > 1e-9) {
                     throw std::invalid_argument("table probabilities must sum to 1");
                   }
                 },
                 [this](const ProductModel& p) {
                   if (p.m < 1) throw std::invalid_argument("product length must be >= 1");
                   if (!p.base) throw std::invalid_argument("product without base");
                   if (p.base->dim != dim) throw std::invalid_argument("product dimension");
                   p.base->validate();
                 },
             },
             variant);
}

std::string ModelSpec::name() const {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const SiteOP& m) { os << "site_op(p=" << m.p; },
                 [&](const BondOP& m) { os << "bond_op(p=" << m.p; },
                 [&](const BcppLse& m) { os << "bcpp_lse(p=" << m.p << ",q=" << m.q; },
                 [&](const BcppDlse& m) { os << "bcpp_dlse(p=" << m.p << ",q=" << m.q; },
                 [&](const WeightedBernoulli& m) {
                   os << "weighted_bernoulli(p=" << m.p << ",v=" << m.v;
                 },
                 [&](const TableModel& t) {
                   os << "table(" << (t.orientation == Orientation::kRow ? "row" : "column")
                      << ",outcomes=" << t.outcomes.size();
                 },
                 [&](const ProductModel& p) { os << "product(" << p.base->name() << ",m=" << p.m; },
             },
             variant);
  os << ",d=" << dim << ")";
  return os.str();
}

// ---------------------------------------------------------------------------

UnitLaw unit_law(const ModelSpec& model) {
  UnitLaw law = std::visit(
      Overloaded{
          [&](const SiteOP& m) {
            UnitLaw l;
            l.push_back({1.0 - m.p, {}});
            UnitOutcome open{m.p, {}};
            for (const auto& e : nearest_neighbors(model.dim)) open.entries.push_back({e, 1.0});
            l.push_back(std::move(open));
            return l;
          },
          [&](const BondOP& m) { return bernoulli_subsets(m.p, 1.0, nearest_neighbors(model.dim)); },
          [&](const BcppLse& m) { return bcpp_law(m.p, m.q, model.dim); },
          [&](const BcppDlse& m) { return bcpp_law(m.p, m.q, model.dim); },
          [&](const WeightedBernoulli& m) { return bernoulli_subsets(m.p, m.v, m.neighborhood); },
          [&](const TableModel& t) { return t.outcomes; },
          [&](const ProductModel&) -> UnitLaw {
            throw std::invalid_argument("product kernels have no independence unit");
          },
      },
      model.variant);
  canonicalize(law);
  return law;
}

UnitRealization sample_unit(const ModelSpec& model, std::uint64_t seed, int step,
                            const Site& site) {
  rng::Stream s(rng::key(seed, rng::Tag::kKernelUnit, step, site));
  UnitRealization r = std::visit(
      Overloaded{
          [&](const SiteOP& m) {
            UnitRealization u;
            if (s.bernoulli(m.p)) {
              for (const auto& e : nearest_neighbors(model.dim)) u.push_back({e, 1.0});
            }
            return u;
          },
          [&](const BondOP& m) {
            UnitRealization u;
            for (const auto& e : nearest_neighbors(model.dim)) {
              if (s.bernoulli(m.p)) u.push_back({e, 1.0});
            }
            return u;
          },
          [&](const BcppLse& m) { return draw_bcpp(s, m.p, m.q, model.dim); },
          [&](const BcppDlse& m) { return draw_bcpp(s, m.p, m.q, model.dim); },
          [&](const WeightedBernoulli& m) {
            UnitRealization u;
            for (const auto& e : m.neighborhood) {
              if (s.bernoulli(m.p) && m.v != 0.0) u.push_back({e, m.v});
            }
            return u;
          },
          [&](const TableModel& t) {
            const double u = s.uniform();
            double acc = 0.0;
            for (const auto& o : t.outcomes) {
              acc += o.prob;
              if (u < acc) return o.entries;
            }
            return t.outcomes.back().entries;
          },
          [&](const ProductModel&) -> UnitRealization {
            throw std::invalid_argument("product kernels have no independence unit");
          },
      },
      model.variant);
  std::erase_if(r, [](const UnitEntry& e) { return e.value == 0.0; });
  sort_realization(r);
  return r;
}

std::vector<Site> possible_offsets(const ModelSpec& model) {
  std::vector<Site> out;
  if (model.is_product()) {
    return linf_ball(model.dim, model.range());
  }
  for (const auto& o : unit_law(model)) {
    for (const auto& e : o.entries) out.push_back(e.offset);
  }
  normalize_sites(out);
  return out;
}

bool is_binary(const ModelSpec& model) {
  if (model.is_product()) return model.block_length() == 1 && is_binary(model.base());
  for (const auto& o : unit_law(model)) {
    for (const auto& e : o.entries) {
      if (e.value != 1.0) return false;
    }
  }
  return true;
}

bool two_site_condition(const ModelSpec& model) {
  if (model.is_product()) {
    throw std::invalid_argument("two-site condition is defined for LSE/DLSE base kernels");
  }
  for (const auto& o : unit_law(model)) {
    if (o.prob > 0.0 && o.entries.size() >= 2) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------

std::vector<KernelEntry> Environment::row(int step, const Site& x) const {
  std::vector<KernelEntry> out;
  row(step, x, out);
  return out;
}

double Environment::entry(int step, const Site& x, const Site& y) const {
  for (const auto& e : row(step, x)) {
    if (e.target == y) return e.value;
  }
  return 0.0;
}

KernelSlice Environment::slice(int step, std::span<const Site> window) const {
  std::vector<KernelSlice::Row> rows;
  rows.reserve(window.size());
  int max_disp = 0;
  for (const auto& x : window) {
    KernelSlice::Row r{x, {}};
    row(step, x, r.entries);
    for (const auto& e : r.entries) max_disp = std::max(max_disp, (e.target - x).linf());
    rows.push_back(std::move(r));
  }
  const int r = range() > 0 ? range() : max_disp + 1;
  return KernelSlice(step, r, std::move(rows));
}

SampledEnvironment::SampledEnvironment(ModelSpec model, std::uint64_t seed)
    : model_(std::move(model)), seed_(seed) {
  model_.validate();
  range_ = model_.range();
  if (model_.is_product()) {
    base_ = std::make_unique<SampledEnvironment>(model_.base(), seed_);
  } else {
    offsets_ = possible_offsets(model_);
  }
}

void SampledEnvironment::row(int step, const Site& x, std::vector<KernelEntry>& out) const {
  if (step < 1) throw std::invalid_argument("kernel steps start at 1");
  if (base_) {
    const RowKey key{step, x};
    auto it = product_rows_.find(key);
    if (it == product_rows_.end()) {
      const int m = model_.block_length();
      std::vector<KernelEntry> cur{{x, 1.0}};
      std::vector<KernelEntry> next;
      std::vector<KernelEntry> buf;
      for (int s = (step - 1) * m + 1; s <= step * m; ++s) {
        next.clear();
        for (const auto& c : cur) {
          buf.clear();
          base_->row(s, c.target, buf);
          for (const auto& e : buf) next.push_back({e.target, c.value * e.value});
        }
        std::stable_sort(next.begin(), next.end(), [](const KernelEntry& a, const KernelEntry& b) {
          return a.target < b.target;
        });
        cur.clear();
        for (const auto& e : next) {
          if (!cur.empty() && cur.back().target == e.target) {
            cur.back().value += e.value;
          } else {
            cur.push_back(e);
          }
        }
      }
      it = product_rows_.emplace(key, std::move(cur)).first;
    }
    out.insert(out.end(), it->second.begin(), it->second.end());
    return;
  }
  UnitRealization scratch;
  assemble_row(
      model_.orientation(), offsets_, x,
      [&](const Site& unit_site) -> const UnitRealization& {
        scratch = sample_unit(model_, seed_, step, unit_site);
        return scratch;
      },
      out);
}

KernelSlice sample_slice(const ModelSpec& model, std::uint64_t seed, int step,
                         std::span<const Site> window) {
  return SampledEnvironment(model, seed).slice(step, window);
}

KernelSlice product_slice(const ModelSpec& product, std::uint64_t seed, int block,
                          std::span<const Site> window) {
  if (!product.is_product()) throw std::invalid_argument("product_slice needs a product model");
  return SampledEnvironment(product, seed).slice(block, window);
}

// ---------------------------------------------------------------------------

namespace {

EntryTailLaw tail_from_unit_law(const ModelSpec& model, double threshold) {
  EntryTailLaw t;
  t.sites = possible_offsets(model);
  t.prob.assign(t.sites.size(), 0.0);
  t.stderr_prob.assign(t.sites.size(), 0.0);
  for (const auto& o : unit_law(model)) {
    for (const auto& e : o.entries) {
      if (e.value >= threshold) {
        auto it = std::lower_bound(t.sites.begin(), t.sites.end(), e.offset);
        t.prob[static_cast<std::size_t>(it - t.sites.begin())] += o.prob;
      }
    }
  }
  return t;
}

/// Exact law of the first row of a product by enumerating every relevant unit.
std::optional<EntryTailLaw> tail_by_enumeration(const ModelSpec& model, double threshold,
                                                std::uint64_t budget) {
  const ModelSpec& base = model.base();
  const int m = model.block_length();
  const int r = base.range();
  const Orientation orient = base.orientation();
  const UnitLaw law = unit_law(base);
  const auto offsets = possible_offsets(base);

  // Unit sites per step that can influence row o of the product.
  std::vector<std::vector<Site>> units(static_cast<std::size_t>(m));
  std::size_t unit_count = 0;
  for (int k = 1; k <= m; ++k) {
    const int radius = (orient == Orientation::kColumn ? k : k - 1) * (r - 1) + 1;
    units[static_cast<std::size_t>(k - 1)] = linf_ball(base.dim, radius);
    unit_count += units[static_cast<std::size_t>(k - 1)].size();
  }
  const double log_configs =
      static_cast<double>(unit_count) * std::log(static_cast<double>(law.size()));
  if (log_configs > std::log(static_cast<double>(budget))) return std::nullopt;

  const std::size_t radix = law.size();
  std::vector<std::size_t> digit(unit_count, 0);
  std::vector<std::unordered_map<Site, std::size_t, SiteHash>> index(static_cast<std::size_t>(m));
  {
    std::size_t u = 0;
    for (std::size_t k = 0; k < units.size(); ++k) {
      for (const auto& s : units[k]) index[k][s] = u++;
    }
  }

  EntryTailLaw t;
  t.sites = linf_ball(base.dim, model.range());
  t.prob.assign(t.sites.size(), 0.0);
  t.stderr_prob.assign(t.sites.size(), 0.0);

  std::vector<KernelEntry> cur, next, buf;
  while (true) {
    double weight = 1.0;
    for (auto d : digit) weight *= law[d].prob;
    if (weight > 0.0) {
      cur.assign({{Site::origin(base.dim), 1.0}});
      for (int k = 0; k < m; ++k) {
        next.clear();
        for (const auto& c : cur) {
          buf.clear();
          assemble_row(
              orient, offsets, c.target,
              [&](const Site& us) -> const UnitRealization& {
                return law[digit[index[static_cast<std::size_t>(k)].at(us)]].entries;
              },
              buf);
          for (const auto& e : buf) next.push_back({e.target, c.value * e.value});
        }
        std::sort(next.begin(), next.end(), [](const KernelEntry& a, const KernelEntry& b) {
          return a.target < b.target;
        });
        cur.clear();
        for (const auto& e : next) {
          if (!cur.empty() && cur.back().target == e.target) {
            cur.back().value += e.value;
          } else {
            cur.push_back(e);
          }
        }
      }
      for (const auto& e : cur) {
        if (e.value >= threshold) {
          auto it = std::lower_bound(t.sites.begin(), t.sites.end(), e.target);
          t.prob[static_cast<std::size_t>(it - t.sites.begin())] += weight;
        }
      }
    }
    std::size_t i = 0;
    while (i < unit_count && ++digit[i] == radix) digit[i++] = 0;
    if (i == unit_count) break;
  }
  return t;
}

EntryTailLaw tail_by_monte_carlo(const ModelSpec& model, double threshold, int samples,
                                 std::uint64_t seed) {
  EntryTailLaw t;
  t.exact = false;
  t.sites = linf_ball(model.dim, model.range());
  std::vector<std::uint64_t> hits(t.sites.size(), 0);
  const Site o = Site::origin(model.dim);
  for (int s = 0; s < samples; ++s) {
    SampledEnvironment env(model, rng::derive_seed(seed, static_cast<std::uint64_t>(s)));
    for (const auto& e : env.row(1, o)) {
      if (e.value >= threshold) {
        auto it = std::lower_bound(t.sites.begin(), t.sites.end(), e.target);
        ++hits[static_cast<std::size_t>(it - t.sites.begin())];
      }
    }
  }
  for (std::size_t i = 0; i < t.sites.size(); ++i) {
    const double p = static_cast<double>(hits[i]) / samples;
    t.prob.push_back(p);
    t.stderr_prob.push_back(std::sqrt(p * (1.0 - p) / samples));
  }
  return t;
}

HeavySiteInfo pick_max(const EntryTailLaw& t, double delta, double epsilon) {
  double sup = 0.0;
  for (double p : t.prob) sup = std::max(sup, p);
  if (!(sup > 0.0)) {
    throw NoHeavyEntryError("P(B_{o,x} >= 1 + delta) vanishes for every x at delta = " +
                            std::to_string(delta));
  }
  const double slack = std::max(epsilon, 1e-12);
  std::vector<std::size_t> order(t.sites.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return SiteOrder{}(t.sites[a], t.sites[b]); });
  for (auto i : order) {
    if (t.prob[i] > 0.0 && t.prob[i] >= sup - slack) {
      return {t.sites[i], delta, t.prob[i], t.stderr_prob[i], t.exact};
    }
  }
  throw NoHeavyEntryError("no maximizing site");  // unreachable
}

}  // namespace

EntryTailLaw entry_tail_law(const ModelSpec& model, double threshold,
                            const HeavyOptions& options) {
  model.validate();
  if (!model.is_product()) return tail_from_unit_law(model, threshold);
  if (model.block_length() == 1) {
    auto t = tail_from_unit_law(model.base(), threshold);
    return t;
  }
  if (auto t = tail_by_enumeration(model, threshold, options.enumeration_budget)) return *t;
  return tail_by_monte_carlo(model, threshold, options.mc_samples, options.mc_seed);
}

HeavySiteInfo heavy_site(const ModelSpec& model, double delta, const HeavyOptions& options) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  return pick_max(entry_tail_law(model, 1.0 + delta, options), delta, options.epsilon);
}

Site preferred_offset(const ModelSpec& model, double delta, const HeavyOptions& options) {
  try {
    return heavy_site(model, delta, options).site;
  } catch (const NoHeavyEntryError&) {
  }
  try {
    return pick_max(entry_tail_law(model, 1.0, options), 0.0, 0.0).site;
  } catch (const NoHeavyEntryError&) {
    return nearest_neighbors(model.dim).front();
  }
}

}  // namespace lingrowth
