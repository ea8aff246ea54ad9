#include "lingrowth/core.hpp"

#include <cstdlib>
#include <numeric>

namespace lingrowth {

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("lattice dimension must be in [1, " +
                                std::to_string(kMaxDim) + "], got " + std::to_string(dim));
  }
}

}  // namespace

Site::Site(std::initializer_list<int> coords) {
  check_dim(static_cast<int>(coords.size()));
  dim_ = static_cast<std::uint8_t>(coords.size());
  std::size_t i = 0;
  for (int v : coords) c_[i++] = v;
}

Site Site::origin(int dim) {
  check_dim(dim);
  Site s;
  s.dim_ = static_cast<std::uint8_t>(dim);
  return s;
}

Site Site::unit(int dim, int axis, int sign) {
  Site s = origin(dim);
  if (axis < 0 || axis >= dim) throw std::invalid_argument("axis out of range");
  s.c_[static_cast<std::size_t>(axis)] = sign;
  return s;
}

Site Site::from_coords(std::span<const int> coords) {
  check_dim(static_cast<int>(coords.size()));
  Site s;
  s.dim_ = static_cast<std::uint8_t>(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) s.c_[i] = coords[i];
  return s;
}

int Site::linf() const {
  int m = 0;
  for (int i = 0; i < dim_; ++i) m = std::max(m, std::abs(c_[static_cast<std::size_t>(i)]));
  return m;
}

int Site::l1() const {
  int s = 0;
  for (int i = 0; i < dim_; ++i) s += std::abs(c_[static_cast<std::size_t>(i)]);
  return s;
}

bool Site::is_origin() const {
  return std::all_of(c_.begin(), c_.end(), [](std::int32_t v) { return v == 0; });
}

Site Site::operator+(const Site& o) const {
  Site r = *this;
  for (std::size_t i = 0; i < kMaxDim; ++i) r.c_[i] += o.c_[i];
  return r;
}

Site Site::operator-(const Site& o) const {
  Site r = *this;
  for (std::size_t i = 0; i < kMaxDim; ++i) r.c_[i] -= o.c_[i];
  return r;
}

Site Site::operator-() const {
  Site r = *this;
  for (auto& v : r.c_) v = -v;
  return r;
}

Site Site::scaled(int k) const {
  Site r = *this;
  for (auto& v : r.c_) v *= k;
  return r;
}

std::string Site::to_string() const {
  std::string s;
  for (int i = 0; i < dim_; ++i) {
    if (i) s += ';';
    s += std::to_string(c_[static_cast<std::size_t>(i)]);
  }
  return s;
}

std::vector<int> Site::coords() const {
  return {c_.begin(), c_.begin() + dim_};
}

std::size_t SiteHash::operator()(const Site& s) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(s.dim());
  for (int i = 0; i < s.dim(); ++i) {
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(s[i])) + 0x9e3779b97f4a7c15ULL +
         (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

bool SiteOrder::operator()(const Site& a, const Site& b) const {
  const int na = a.linf();
  const int nb = b.linf();
  if (na != nb) return na < nb;
  return a < b;
}

Site min_site(std::span<const Site> sites, SiteOrder order) {
  if (sites.empty()) throw std::invalid_argument("min_site of an empty set");
  return *std::min_element(sites.begin(), sites.end(), order);
}

std::vector<Site> linf_ball(int dim, int radius) {
  check_dim(dim);
  std::vector<Site> out;
  if (radius <= 0) return out;
  const int side = 2 * radius - 1;
  std::size_t count = 1;
  for (int i = 0; i < dim; ++i) count *= static_cast<std::size_t>(side);
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Site s = Site::origin(dim);
    std::size_t rem = k;
    for (int i = dim - 1; i >= 0; --i) {
      s.set(i, static_cast<int>(rem % static_cast<std::size_t>(side)) - (radius - 1));
      rem /= static_cast<std::size_t>(side);
    }
    out.push_back(s);
  }
  return out;
}

void normalize_sites(std::vector<Site>& sites) {
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
}

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

ExactArith::Value ExactArith::scale(const Value& m, double b) {
  if (b != std::floor(b) || b > 9007199254740992.0) {
    throw NonIntegerEntryError("exact mode needs integer kernel entries, got " +
                               std::to_string(b));
  }
  return m * static_cast<long long>(b);
}

double ExactArith::log(const Value& v) {
  if (v <= 0) return -std::numeric_limits<double>::infinity();
  const auto bits = boost::multiprecision::msb(v);
  if (bits < 1000) return std::log(v.convert_to<double>());
  const auto shift = bits - 62;
  const Value top = v >> shift;
  return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

// ---------------------------------------------------------------------------

KernelSlice::KernelSlice(int step, int range, std::vector<Row> rows)
    : step_(step), range_(range) {
  if (step < 1) throw std::invalid_argument("kernel step must be >= 1");
  if (range < 1) throw std::invalid_argument("kernel range must be >= 1");
  std::sort(rows.begin(), rows.end(),
            [](const Row& a, const Row& b) { return a.source < b.source; });
  offsets_.reserve(rows.size() + 1);
  offsets_.push_back(0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& row = rows[i];
    if (i > 0 && row.source == rows[i - 1].source) {
      throw std::invalid_argument("duplicate row in kernel slice");
    }
    std::sort(row.entries.begin(), row.entries.end(),
              [](const KernelEntry& a, const KernelEntry& b) { return a.target < b.target; });
    for (std::size_t j = 0; j < row.entries.size(); ++j) {
      const auto& e = row.entries[j];
      if (j > 0 && e.target == row.entries[j - 1].target) {
        throw std::invalid_argument("duplicate entry in kernel row");
      }
      if (e.value == 0.0) continue;
      if (!(e.value >= 1.0) || !std::isfinite(e.value)) {
        throw std::invalid_argument("kernel entry outside {0} u [1, inf) at " +
                                    row.source.to_string() + " -> " + e.target.to_string());
      }
      if ((e.target - row.source).linf() >= range) {
        throw std::invalid_argument("kernel entry beyond range at " + row.source.to_string() +
                                    " -> " + e.target.to_string());
      }
      entries_.push_back(e);
    }
    window_.push_back(row.source);
    offsets_.push_back(entries_.size());
  }
}

KernelSlice KernelSlice::identity(int step, std::span<const Site> window) {
  std::vector<Row> rows;
  rows.reserve(window.size());
  for (const auto& x : window) rows.push_back({x, {{x, 1.0}}});
  return KernelSlice(step, 1, std::move(rows));
}

bool KernelSlice::covers(const Site& x) const {
  return std::binary_search(window_.begin(), window_.end(), x);
}

std::span<const KernelEntry> KernelSlice::row(const Site& x) const {
  auto it = std::lower_bound(window_.begin(), window_.end(), x);
  if (it == window_.end() || *it != x) return {};
  const auto i = static_cast<std::size_t>(it - window_.begin());
  return std::span<const KernelEntry>(entries_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
}

double KernelSlice::entry(const Site& x, const Site& y) const {
  for (const auto& e : row(x)) {
    if (e.target == y) return e.value;
  }
  return 0.0;
}

double KernelSlice::max_row_sum() const {
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < offsets_.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = offsets_[i]; j < offsets_[i + 1]; ++j) s += entries_[j].value;
    best = std::max(best, s);
  }
  return best;
}

}  // namespace lingrowth
