#include "lingrowth/evolution.hpp"

#include <charconv>

namespace lingrowth {

ExplicitEnvironment::ExplicitEnvironment(int dim, std::vector<KernelSlice> slices)
    : dim_(dim), slices_(std::move(slices)) {
  std::sort(slices_.begin(), slices_.end(),
            [](const KernelSlice& a, const KernelSlice& b) { return a.step() < b.step(); });
  for (std::size_t i = 0; i < slices_.size(); ++i) {
    if (i > 0 && slices_[i].step() == slices_[i - 1].step()) {
      throw std::invalid_argument("two slices for step " + std::to_string(slices_[i].step()));
    }
    range_ = std::max(range_, slices_[i].range());
  }
}

void ExplicitEnvironment::row(int step, const Site& x, std::vector<KernelEntry>& out) const {
  auto it = std::lower_bound(slices_.begin(), slices_.end(), step,
                             [](const KernelSlice& s, int t) { return s.step() < t; });
  if (it == slices_.end() || it->step() != step) return;
  for (const auto& e : it->row(x)) out.push_back(e);
}

SupportChain::SupportChain(int time, std::vector<Site> sites) : time_(time), sites_(std::move(sites)) {
  normalize_sites(sites_);
}

bool SupportChain::contains(const Site& y) const {
  return std::binary_search(sites_.begin(), sites_.end(), y);
}

void SupportChain::advance(const Environment& env) {
  scratch_.clear();
  for (const auto& x : sites_) {
    row_.clear();
    env.row(time_ + 1, x, row_);
    for (const auto& e : row_) scratch_.push_back(e.target);
  }
  normalize_sites(scratch_);
  sites_.swap(scratch_);
  ++time_;
}

void SupportChain::advance_to(const Environment& env, int time) {
  while (time_ < time && !sites_.empty()) advance(env);
  if (sites_.empty()) time_ = std::max(time_, time);
}

bool reaches(const Environment& env, int m, const Site& x, int n, const Site& y) {
  if (n < m) return false;
  if (n == m) return x == y;
  SupportChain c(m, x);
  c.advance_to(env, n);
  return c.contains(y);
}

bool alive_until(const Environment& env, int m, const Site& x, int n) {
  SupportChain c(m, x);
  c.advance_to(env, n);
  return !c.empty();
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace lingrowth
