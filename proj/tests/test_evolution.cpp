#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "lingrowth/evolution.hpp"

using namespace lingrowth;

namespace {

// open-path count by explicit recursion over entries
long long count_paths(const Environment& env, int m, const Site& x, int n, const Site& y) {
  if (m == n) return x == y ? 1 : 0;
  long long c = 0;
  for (const auto& e : env.row(m + 1, x)) c += count_paths(env, m + 1, e.target, n, y);
  return c;
}

long long binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// occupied set at time n by set-based sweep over explicit entry queries
std::set<int> sweep(const Environment& env, int m, int x, int n) {
  std::set<int> cur{x};
  for (int s = m + 1; s <= n && !cur.empty(); ++s) {
    std::set<int> next;
    for (int u : cur) {
      for (int v = u - 1; v <= u + 1; ++v) {
        if (env.entry(s, Site{u}, Site{v}) >= 1.0) next.insert(v);
      }
    }
    cur = next;
  }
  return cur;
}

}  // namespace

TEST_SUITE("evolution") {
  TEST_CASE("SiteOP(1): binomial masses") {
    const auto t = run(ModelSpec::site_op(1.0), 5, 10);
    for (int n = 0; n <= 10; ++n) {
      CHECK(t.at(n).total() == std::ldexp(1.0, n));
      for (int k = -n; k <= n; ++k) {
        const auto* v = t.at(n).find(Site{k});
        const double want = (n + k) % 2 == 0 ? static_cast<double>(binom(n, (n + k) / 2)) : 0.0;
        CHECK((v ? *v : 0.0) == want);
      }
    }
  }

  TEST_CASE("SiteOP(0) dies at the first step") {
    const auto t = run(ModelSpec::site_op(0.0), 5, 4);
    CHECK(t.at(0).total() == 1.0);
    CHECK(t.at(1).empty());
    CHECK_FALSE(alive(t, 1));
    CHECK(t.at(4).empty());
  }

  TEST_CASE("masses equal open-path counts") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto t = run<ExactArith>(ModelSpec::site_op(0.6), seed, 8);
      for (int n = 0; n <= 8; ++n) {
        for (int x = -n; x <= n; ++x) {
          const auto* v = t.at(n).find(Site{x});
          CHECK((v ? *v : BigInt(0)) == count_paths(*t.env, 0, Site{0}, n, Site{x}));
        }
      }
    }
  }

  TEST_CASE("row-wise step equals apply_kernel on the dilated window") {
    const auto model = ModelSpec::weighted_bernoulli(0.6, 1.5, {Site{-1}, Site{0}, Site{1}});
    auto env = std::make_shared<SampledEnvironment>(model, 12);
    auto m = MassField::delta(Site{0});
    for (int n = 0; n < 15; ++n) {
      const auto s = m.support();
      const auto a = advance_field(*env, m);
      const auto b = apply_kernel(m, env->slice(n + 1, s));
      REQUIRE(a.support_size() == b.support_size());
      for (std::size_t i = 0; i < a.entries().size(); ++i) {
        CHECK(a.entries()[i].site == b.entries()[i].site);
        CHECK(a.entries()[i].value == b.entries()[i].value);
      }
      m = a;
    }
  }

  TEST_CASE("log and exact modes agree with linear") {
    const auto model = ModelSpec::bcpp_lse(0.8, 0.6);
    const auto lin = run(model, 4, 30);
    const auto lg = run<LogArith>(model, 4, 30);
    const auto ex = run<ExactArith>(model, 4, 30);
    for (int n = 0; n <= 30; ++n) {
      CHECK(lg.at(n).support_size() == lin.at(n).support_size());
      if (!lin.at(n).empty()) {
        CHECK(lg.at(n).log_total() == doctest::Approx(std::log(lin.at(n).total())).epsilon(1e-12));
        CHECK(ex.at(n).total().convert_to<double>() == lin.at(n).total());
      }
    }
  }

  TEST_CASE("restart from (0, o) is the chain itself") {
    const auto t = run(ModelSpec::bond_op(0.7), 9, 20);
    const auto h = restart(t, 0, Site{0});
    for (int n = 0; n <= 20; ++n) {
      REQUIRE(h.at(n).support_size() == t.at(n).support_size());
      for (std::size_t i = 0; i < h.at(n).entries().size(); ++i) {
        CHECK(h.at(n).entries()[i].value == t.at(n).entries()[i].value);
      }
    }
  }

  TEST_CASE("SiteOP(1) restart support is the parity cone") {
    const auto model = ModelSpec::site_op(1.0, 2);
    auto env = std::make_shared<SampledEnvironment>(model, 1);
    const auto t = run<LinearArith>(env, 6, MassField::delta(Site::origin(2)));
    const auto h = restart(t, 2, Site{1, -1});
    for (int n = 2; n <= 6; ++n) {
      std::set<Site> want;
      for (const auto& s : linf_ball(2, n + 3)) {
        const int d = (s - Site{1, -1}).l1();
        if (d <= n - 2 && (d - (n - 2)) % 2 == 0) want.insert(s);
      }
      const auto got = h.at(n).support();
      CHECK(std::set<Site>(got.begin(), got.end()) == want);
    }
  }

  TEST_CASE("restart dies when later slices are zero") {
    std::vector<KernelSlice> slices;
    slices.push_back(KernelSlice(1, 2, {{Site{0}, {{Site{1}, 1.0}}}}));
    slices.push_back(KernelSlice(2, 2, {{Site{1}, {{Site{0}, 1.0}}}}));
    auto env = std::make_shared<ExplicitEnvironment>(1, std::move(slices));
    const auto t = run<LinearArith>(env, 4, MassField::delta(Site{0}));
    const auto h = restart(t, 2, Site{0});
    CHECK(h.at(2).support_size() == 1);
    CHECK(h.at(3).empty());
    CHECK_FALSE(alive(h, 3));
  }

  TEST_CASE("reaches") {
    SampledEnvironment full(ModelSpec::site_op(1.0), 3);
    CHECK(reaches(full, 4, Site{2}, 4, Site{2}));
    CHECK_FALSE(reaches(full, 4, Site{2}, 4, Site{1}));
    CHECK(reaches(full, 0, Site{0}, 3, Site{1}));
    CHECK_FALSE(reaches(full, 0, Site{0}, 3, Site{0}));
    CHECK_FALSE(reaches(full, 3, Site{0}, 1, Site{0}));
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      SampledEnvironment env(ModelSpec::site_op(0.6), seed);
      for (int n = 1; n <= 7; ++n) {
        for (int y = -n; y <= n; ++y) {
          CHECK(reaches(env, 0, Site{0}, n, Site{y}) ==
                (count_paths(env, 0, Site{0}, n, Site{y}) > 0));
        }
      }
    }
  }

  TEST_CASE("alive matches a set-based sweep") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      SampledEnvironment env(ModelSpec::site_op(0.55), seed);
      for (int n : {1, 5, 20, 50}) {
        CHECK(alive_until(env, 0, Site{0}, n) == !sweep(env, 0, 0, n).empty());
      }
      SupportChain c(0, Site{0});
      c.advance_to(env, 50);
      const auto s = sweep(env, 0, 0, 50);
      std::set<int> got;
      for (const auto& x : c.sites()) got.insert(x[0]);
      CHECK(got == s);
    }
  }

  TEST_CASE("snapshot rows") {
    const auto t = run(ModelSpec::site_op(1.0), 1, 2);
    std::ostringstream os;
    write_snapshot_rows(os, t, 3);
    CHECK(os.str() == "3,0,1,1,0\n3,1,2,2,0.6931471805599453\n3,2,4,3,1.3862943611198906\n");
  }

  TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 6.02e23, -2.5e-300}) {
      CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  }
}
