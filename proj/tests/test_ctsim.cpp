#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lingrowth/ctsim.hpp"
#include "lingrowth/estimator.hpp"
#include "lingrowth/rng.hpp"

using namespace lingrowth;

namespace {

CtKernel identity_kernel() { return CtKernel::deterministic(1, {{Site{0}, 1.0}}); }

CtKernel doubling_kernel() { return CtKernel::deterministic(1, {{Site{0}, 2.0}}); }

// K_0 = 1, K_{e1} ~ Bernoulli(1/2)
CtKernel branching_kernel() {
  return CtKernel::from_law(1, {{0.5, {{Site{0}, 1.0}}}, {0.5, {{Site{0}, 1.0}, {Site{1}, 1.0}}}});
}

// the whole mass jumps one step left or right
CtKernel walk_kernel() {
  return CtKernel::from_law(1, {{0.5, {{Site{-1}, 1.0}}}, {0.5, {{Site{1}, 1.0}}}});
}

template <class F>
void check_same(const F& a, const F& b) {
  REQUIRE(a.support_size() == b.support_size());
  for (std::size_t i = 0; i < a.entries().size(); ++i) {
    CHECK(a.entries()[i].site == b.entries()[i].site);
    CHECK(a.entries()[i].value == b.entries()[i].value);
  }
}

int rings_in(const ClockBank& c, const Site& z, double lo, double hi) {
  int k = 0;
  for (int i = 1; c.ring(z, i) <= hi; ++i) {
    if (c.ring(z, i) > lo) ++k;
  }
  return k;
}

}  // namespace

TEST_SUITE("ctsim") {
  TEST_CASE("kernel law") {
    const auto k = branching_kernel();
    CHECK(k.range() == 2);
    CHECK(k.prob_sum_above_one() == 0.5);
    CHECK(k.prob_sum_equal_one() == 0.5);
    CHECK(k.integer_valued());
    CHECK_THROWS_AS(CtKernel::from_law(1, {{0.5, {{Site{0}, 1.0}}}}), std::invalid_argument);
    CHECK_THROWS_AS(CtKernel::deterministic(1, {{Site{0}, 0.5}}), std::invalid_argument);
    int plus = 0;
    for (int i = 1; i <= 4000; ++i) plus += k_at(k.sample(3, Site{i % 7}, i), Site{1}) == 1.0;
    CHECK(std::abs(plus / 4000.0 - 0.5) < 3 * 0.5 / std::sqrt(4000.0));
  }

  TEST_CASE("identity kernel: Y is constant") {
    const auto y0 = MassField::from_entries(0, {{Site{-2}, 1.0}, {Site{0}, 3.0}});
    const auto r = ct_run_y(identity_kernel(), 5, y0, 6.0);
    REQUIRE(r.snapshots.size() == 7);
    for (const auto& s : r.snapshots) {
      CHECK(s.support_size() == 2);
      CHECK(*s.find(Site{0}) == 3.0);
      CHECK(*s.find(Site{-2}) == 1.0);
    }
    CHECK(r.event_count > 0);
  }

  TEST_CASE("doubling kernel: Y_1 = 2^(events at o)") {
    const int runs = 10000;
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < runs; ++i) {
      const auto seed = rng::derive_seed(77, static_cast<std::uint64_t>(i));
      const auto r = ct_run_y(doubling_kernel(), seed, MassField::delta(Site{0}), 1.0);
      const double k = static_cast<double>(r.event_count);
      CHECK(*r.snapshots[1].find(Site{0}) == std::ldexp(1.0, static_cast<int>(k)));
      CHECK(k == rings_in(ClockBank(seed), Site{0}, 0.0, 1.0));
      sum += k;
      sq += k * k;
    }
    const double mean = sum / runs;
    const double se = std::sqrt((sq / runs - mean * mean) / runs);
    CHECK(std::abs(mean - 1.0) <= 3 * se);
  }

  TEST_CASE("identity kernel: Z is constant") {
    const auto z0 = MassField::from_entries(0, {{Site{1}, 2.0}, {Site{4}, 1.0}});
    const auto r = ct_run_z(identity_kernel(), 8, z0, 5.0);
    for (const auto& s : r.snapshots) check_same(s, z0);
    CHECK(*r.snapshots.back().find(Site{4}) == 1.0);
  }

  TEST_CASE("Z: a single event copies the neighbour mass") {
    // K = {K_1 = 1}: an event at z sets Z_z = Z_{z+1}.
    const auto k = CtKernel::deterministic(1, {{Site{1}, 1.0}});
    int found = 0;
    for (std::uint64_t seed = 1; seed < 400 && found < 5; ++seed) {
      ClockBank c(seed);
      const double t0 = c.ring(Site{0}, 1);
      if (!(t0 < 1.0) || c.ring(Site{1}, 1) <= 1.0) continue;
      if (rings_in(c, Site{-1}, t0, 1.0) > 0) continue;
      ++found;
      const auto r = ct_run_z(k, seed, MassField::delta(Site{1}), 1.0);
      const auto& z1 = r.snapshots[1];
      REQUIRE(z1.support_size() == 2);
      CHECK(*z1.find(Site{0}) == 1.0);
      CHECK(*z1.find(Site{1}) == 1.0);
    }
    CHECK(found == 5);
  }

  TEST_CASE("Z support grows at most polynomially") {
    std::vector<double> lt;
    std::vector<double> ls;
    const int runs = 20;
    for (int t = 4; t <= 64; t *= 2) {
      double s = 0.0;
      for (int i = 0; i < runs; ++i) {
        const auto r = ct_run_z(branching_kernel(), rng::derive_seed(5, i), MassField::delta(Site{0}),
                                static_cast<double>(t));
        s += static_cast<double>(r.snapshots.back().support_size());
      }
      lt.push_back(std::log(t));
      ls.push_back(std::log(s / runs));
    }
    const auto f = fit_growth(lt, ls, 1.0);
    CHECK(f.rate <= 1.3);
  }

  TEST_CASE("discretize: identity and doubling") {
    const std::vector<Site> window{Site{-2}, Site{-1}, Site{0}, Site{1}, Site{2}};
    const auto id = ct_discretize(identity_kernel(), 4, 3, window);
    CHECK(id.step() == 4);
    for (const auto& x : window) {
      CHECK(id.entry(x, x) == 1.0);
      CHECK(id.row(x).size() == 1);
    }
    ClockBank clocks(4);
    const auto dbl = ct_discretize(doubling_kernel(), clocks, 3, window);
    for (const auto& x : window) {
      CHECK(dbl.entry(x, x) == std::ldexp(1.0, rings_in(clocks, x, 3.0, 4.0)));
      CHECK(dbl.row(x).size() == 1);
    }
  }

  TEST_CASE("discretized entries lie in {0} u [1, inf)") {
    const std::vector<Site> window{Site{-1}, Site{0}, Site{1}};
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto s = ct_discretize(branching_kernel(), seed, 2, window);
      for (const auto& x : window) {
        for (const auto& e : s.row(x)) CHECK(e.value >= 1.0);
      }
    }
  }

  TEST_CASE("replay: the discretized chain reproduces Y at integer times") {
    for (const auto& kernel : {branching_kernel(), walk_kernel()}) {
      for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto ct = ct_run_y(kernel, seed, MassField::delta(Site{0}), 8.0);
        auto env = std::make_shared<CtDiscretizedEnvironment>(kernel, seed);
        const auto dt = run<LinearArith>(env, 8, MassField::delta(Site{0}));
        for (int n = 0; n <= 8; ++n) check_same(dt.at(n), ct.snapshots[static_cast<std::size_t>(n)]);
      }
    }
  }

  TEST_CASE("thinning: silent sites change nothing") {
    CtOptions loud;
    loud.log_events = true;
    for (int z = -6; z <= 6; ++z) loud.silent_sites.push_back(Site{z});
    CtOptions quiet;
    quiet.log_events = true;
    for (const auto process : {CtProcess::kY, CtProcess::kZ}) {
      for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        ClockBank c1(seed);
        ClockBank c2(seed);
        const auto a = ct_run<LinearArith>(process, branching_kernel(), c1, MassField::delta(Site{0}), 5.0, quiet);
        const auto b = ct_run<LinearArith>(process, branching_kernel(), c2, MassField::delta(Site{0}), 5.0, loud);
        for (std::size_t k = 0; k < a.snapshots.size(); ++k) check_same(a.snapshots[k], b.snapshots[k]);
        CHECK(b.event_count >= a.event_count);
        std::vector<CtEvent> ea;
        std::vector<CtEvent> eb;
        for (const auto& e : a.events) if (!e.noop) ea.push_back(e);
        for (const auto& e : b.events) if (!e.noop) eb.push_back(e);
        REQUIRE(ea.size() == eb.size());
        for (std::size_t i = 0; i < ea.size(); ++i) {
          CHECK(ea[i].t == eb[i].t);
          CHECK(ea[i].z == eb[i].z);
          CHECK(ea[i].i == eb[i].i);
        }
      }
    }
  }

  TEST_CASE("clock gaps are mean-one exponentials") {
    ClockBank c(2024);
    std::vector<double> g;
    for (int z = 0; z < 100; ++z) {
      for (int i = 1; i <= 100; ++i) g.push_back(c.gap(Site{z}, i));
    }
    std::sort(g.begin(), g.end());
    const double n = static_cast<double>(g.size());
    double d = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double f = 1.0 - std::exp(-g[i]);
      d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    CHECK(d * std::sqrt(n) < 1.628);
    double mean = 0.0;
    for (double x : g) mean += x;
    CHECK(std::abs(mean / n - 1.0) < 3.0 / std::sqrt(n));
    CHECK(c.ring(Site{3}, 2) == doctest::Approx(c.gap(Site{3}, 1) + c.gap(Site{3}, 2)));
    CHECK(c.first_after(Site{3}, c.ring(Site{3}, 4)) == 5);
  }

  TEST_CASE("branching kernel grows exponentially") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto r = ct_run_y<LogArith>(branching_kernel(), seed, LogMassField::delta(Site{0}), 30.0);
      std::vector<double> lm;
      for (const auto& s : r.snapshots) lm.push_back(s.log_total());
      CHECK(fit_growth(lm).rate > 0.02);
    }
  }

  TEST_CASE("classification from the law") {
    const auto a = ct_classify(branching_kernel());
    CHECK(a.verdict == Verdict::kCase1);
    CHECK(a.prob_sum_above_one == 0.5);
    const auto b = ct_classify(walk_kernel());
    CHECK(b.verdict == Verdict::kCase3);
    CHECK(b.coalescing);
  }

  TEST_CASE("event csv") {
    const std::vector<CtEvent> ev{{0.5, Site{1}, 1, false, 2.0}, {0.75, Site{-1}, 2, true, 0.0}};
    std::ostringstream os;
    write_event_csv(os, ev);
    CHECK(os.str() == "t,site,i,noop,k_sum\n0.5,1,1,0,2\n0.75,-1,2,1,0\n");
  }
}
