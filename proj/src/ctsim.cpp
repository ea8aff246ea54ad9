#include "lingrowth/ctsim.hpp"

namespace lingrowth {

CtKernel CtKernel::from_law(int dim, UnitLaw law) {
  CtKernel k;
  k.dim = dim;
  for (auto& o : law) {
    std::erase_if(o.entries, [](const UnitEntry& e) { return e.value == 0.0; });
    std::sort(o.entries.begin(), o.entries.end(),
              [](const UnitEntry& a, const UnitEntry& b) { return a.offset < b.offset; });
  }
  canonicalize(law);
  k.law = std::move(law);
  k.validate();
  return k;
}

CtKernel CtKernel::deterministic(int dim, UnitRealization k) {
  return from_law(dim, {{1.0, std::move(k)}});
}

void CtKernel::validate() const {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("bad lattice dimension for K");
  if (law.empty()) throw std::invalid_argument("K needs at least one outcome");
  double total = 0.0;
  for (const auto& o : law) {
    if (!(o.prob >= 0.0)) throw std::invalid_argument("negative probability in K");
    total += o.prob;
    for (std::size_t j = 0; j < o.entries.size(); ++j) {
      const auto& e = o.entries[j];
      if (e.offset.dim() != dim) throw std::invalid_argument("K offset has the wrong dimension");
      if (j > 0 && e.offset == o.entries[j - 1].offset) {
        throw std::invalid_argument("K outcome lists an offset twice");
      }
      if (e.value != 0.0 && !(e.value >= 1.0 && std::isfinite(e.value))) {
        throw std::invalid_argument("K values must lie in {0} u [1, inf)");
      }
    }
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("K probabilities do not sum to 1");
}

int CtKernel::range() const {
  int r = 1;
  for (const auto& o : law) {
    for (const auto& e : o.entries) r = std::max(r, e.offset.linf() + 1);
  }
  return r;
}

std::vector<Site> CtKernel::offsets() const {
  std::vector<Site> out;
  for (const auto& o : law) {
    for (const auto& e : o.entries) out.push_back(e.offset);
  }
  normalize_sites(out);
  return out;
}

UnitRealization CtKernel::sample(std::uint64_t seed, const Site& z, int i) const {
  rng::Stream s(rng::key(seed, rng::Tag::kCtJump, i, z));
  const double u = s.uniform();
  double acc = 0.0;
  for (const auto& o : law) {
    acc += o.prob;
    if (u < acc) return o.entries;
  }
  return law.back().entries;
}

namespace {

double sum_of(const UnitRealization& r) {
  double s = 0.0;
  for (const auto& e : r) s += e.value;
  return s;
}

}  // namespace

double CtKernel::prob_sum_above_one() const {
  double p = 0.0;
  for (const auto& o : law) {
    if (sum_of(o.entries) > 1.0) p += o.prob;
  }
  return p;
}

double CtKernel::prob_sum_equal_one() const {
  double p = 0.0;
  for (const auto& o : law) {
    if (sum_of(o.entries) == 1.0) p += o.prob;
  }
  return p;
}

bool CtKernel::integer_valued() const {
  for (const auto& o : law) {
    for (const auto& e : o.entries) {
      if (e.value != std::floor(e.value)) return false;
    }
  }
  return true;
}

double k_at(const UnitRealization& k, const Site& offset) {
  for (const auto& e : k) {
    if (e.offset == offset) return e.value;
  }
  return 0.0;
}

double ClockBank::gap(const Site& z, int i) const {
  if (i < 1) throw std::invalid_argument("clock index starts at 1");
  return rng::Stream(rng::key(seed_, rng::Tag::kCtClock, i, z)).exponential();
}

double ClockBank::ring(const Site& z, int i) const {
  if (i < 1) throw std::invalid_argument("clock index starts at 1");
  auto& r = rings_[z];
  while (static_cast<int>(r.size()) < i) {
    const double prev = r.empty() ? 0.0 : r.back();
    r.push_back(prev + gap(z, static_cast<int>(r.size()) + 1));
  }
  return r[static_cast<std::size_t>(i - 1)];
}

int ClockBank::first_after(const Site& z, double t) const {
  auto& r = rings_[z];
  while (r.empty() || r.back() <= t) ring(z, static_cast<int>(r.size()) + 1);
  return static_cast<int>(std::upper_bound(r.begin(), r.end(), t) - r.begin()) + 1;
}

namespace {

std::vector<KernelEntry> discretized_row(const CtKernel& kernel, const ClockBank& clocks, int n,
                                         const Site& x) {
  const auto run = ct_run<LinearArith>(CtProcess::kY, kernel, clocks, MassField::delta(x, n), n + 1.0);
  std::vector<KernelEntry> row;
  for (const auto& e : run.snapshots.back().entries()) row.push_back({e.site, e.value});
  return row;
}

}  // namespace

KernelSlice ct_discretize(const CtKernel& kernel, const ClockBank& clocks, int n,
                          std::span<const Site> window) {
  if (n < 0) throw std::invalid_argument("discretization step must be >= 0");
  std::vector<KernelSlice::Row> rows;
  int range = 1;
  for (const auto& x : window) {
    auto entries = discretized_row(kernel, clocks, n, x);
    for (const auto& e : entries) range = std::max(range, (e.target - x).linf() + 1);
    rows.push_back({x, std::move(entries)});
  }
  return KernelSlice(n + 1, range, std::move(rows));
}

KernelSlice ct_discretize(const CtKernel& kernel, std::uint64_t seed, int n,
                          std::span<const Site> window) {
  ClockBank clocks(seed);
  return ct_discretize(kernel, clocks, n, window);
}

CtDiscretizedEnvironment::CtDiscretizedEnvironment(CtKernel kernel, std::uint64_t seed)
    : kernel_(std::move(kernel)), clocks_(seed) {
  kernel_.validate();
}

void CtDiscretizedEnvironment::row(int step, const Site& x, std::vector<KernelEntry>& out) const {
  if (step < 1) throw std::invalid_argument("kernel step must be >= 1");
  const Key key{step, x};
  auto it = rows_.find(key);
  if (it == rows_.end()) {
    it = rows_.emplace(key, discretized_row(kernel_, clocks_, step - 1, x)).first;
  }
  out.insert(out.end(), it->second.begin(), it->second.end());
}

CtClassification ct_classify(const CtKernel& kernel) {
  kernel.validate();
  CtClassification c;
  c.prob_sum_above_one = kernel.prob_sum_above_one();
  c.prob_sum_equal_one = kernel.prob_sum_equal_one();
  c.coalescing = c.prob_sum_equal_one == 1.0;
  if (c.prob_sum_above_one > 0.0) {
    c.verdict = Verdict::kCase1;
    c.reason = "P(sum K > 1) > 0: exponential growth on survival";
  } else if (c.coalescing) {
    c.verdict = Verdict::kCase3;
    c.reason = "sum K = 1 almost surely: coalescing random walk";
  } else {
    c.verdict = Verdict::kCase3;
    c.reason = "sum K <= 1 almost surely: no exponential growth";
  }
  return c;
}

void write_event_csv(std::ostream& os, std::span<const CtEvent> events) {
  os << "t,site,i,noop,k_sum\n";
  for (const auto& e : events) {
    os << format_double(e.t) << ',' << e.z.to_string() << ',' << e.i << ',' << (e.noop ? 1 : 0)
       << ',' << format_double(e.k_sum) << '\n';
  }
}

}  // namespace lingrowth
