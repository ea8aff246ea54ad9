#pragma once

#include <memory>

#include "lingrowth/kernels.hpp"

namespace lingrowth::test {

// Slices `first..last` come from `inside`, every other slice from `outside`.
class SplicedEnvironment : public Environment {
 public:
  SplicedEnvironment(std::shared_ptr<const Environment> inside,
                     std::shared_ptr<const Environment> outside, int first, int last)
      : inside_(std::move(inside)), outside_(std::move(outside)), first_(first), last_(last) {}

  int dim() const override { return inside_->dim(); }
  int range() const override { return std::max(inside_->range(), outside_->range()); }
  void row(int step, const Site& x, std::vector<KernelEntry>& out) const override {
    if (step >= first_ && step <= last_) {
      inside_->row(step, x, out);
    } else {
      outside_->row(step, x, out);
    }
  }
  using Environment::row;

 private:
  std::shared_ptr<const Environment> inside_;
  std::shared_ptr<const Environment> outside_;
  int first_;
  int last_;
};

}  // namespace lingrowth::test
