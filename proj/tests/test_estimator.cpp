#include <doctest.h>

#include <cmath>

#include "lingrowth/estimator.hpp"
#include "lingrowth/rng.hpp"

using namespace lingrowth;

namespace {

ModelSpec coalescing_walk() {
  UnitLaw law{{0.5, {{Site{-1}, 1.0}}}, {0.5, {{Site{1}, 1.0}}}};
  return ModelSpec::table(Orientation::kRow, std::move(law));
}

}  // namespace

TEST_SUITE("estimator") {
  TEST_CASE("estimates") {
    const auto b = binomial_estimate(3, 4);
    CHECK(b.value == 0.75);
    CHECK(b.se == doctest::Approx(std::sqrt(0.75 * 0.25 / 4)));
    const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
    const auto m = mean_estimate(xs);
    CHECK(m.value == 2.5);
    CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  }

  TEST_CASE("survival at the trivial ends") {
    const auto one = survival_prob(ModelSpec::site_op(1.0), 50, 20, 3);
    CHECK(one.value == 1.0);
    CHECK(one.se == 0.0);
    const auto zero = survival_prob(ModelSpec::site_op(0.0), 50, 20, 3);
    CHECK(zero.value == 0.0);
    CHECK(zero.se == 0.0);
  }

  TEST_CASE("survival at nested horizons is consistent") {
    const auto a = survival_prob(ModelSpec::site_op(0.8), 100, 400, 11);
    const auto b = survival_prob(ModelSpec::site_op(0.8), 200, 400, 11);
    CHECK(b.value <= a.value);
    CHECK(std::abs(a.value - b.value) <= 3.0 * std::hypot(a.se, b.se) + 1e-12);
    CHECK(a.value > 0.5);
  }

  TEST_CASE("c_delta: deterministic heavy bonds") {
    const auto r = c_delta(ModelSpec::weighted_bernoulli(1.0, 2.0), 1.0, 1, 50, 10, 1);
    CHECK(r.survival.value == 1.0);
    CHECK(r.heavy_prob.value == 1.0);
    CHECK(r.c_delta_hat == 1.0);
    CHECK(r.bound == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }

  TEST_CASE("c_delta: binary kernels have no heavy entry") {
    const auto r = c_delta(ModelSpec::site_op(0.8), 0.5, 1, 50, 10, 1);
    CHECK(r.c_delta_hat == 0.0);
    CHECK(r.bound == 0.0);
    CHECK_FALSE(r.heavy_site.has_value());
  }

  TEST_CASE("c_delta: two-fold product of site percolation") {
    const auto r = c_delta(ModelSpec::site_op(0.9), 1.0, 2, 50, 50, 1);
    CHECK(r.heavy_exact);
    CHECK(r.heavy_prob.value == doctest::Approx(0.729).epsilon(1e-12));
    CHECK(r.heavy_prob.se == 0.0);
    REQUIRE(r.heavy_site.has_value());
    CHECK(*r.heavy_site == Site{0});
    CHECK(r.c_delta_hat == doctest::Approx(r.survival.value * 0.729).epsilon(1e-12));
    CHECK(r.bound == doctest::Approx(r.c_delta_hat * std::log(2.0) / 2).epsilon(1e-12));
  }

  TEST_CASE("fit_growth") {
    std::vector<double> lm;
    for (int n = 0; n <= 40; ++n) lm.push_back(n * std::log(2.0));
    const auto f = fit_growth(lm);
    CHECK(f.rate == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(f.se == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(f.points == 21);

    const auto t = run<LogArith>(ModelSpec::site_op(1.0), 1, 60);
    const auto lms = log_mass_series(t);
    CHECK(fit_growth(lms).rate == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // rows summing to 2 everywhere
    const auto t2 = run<LogArith>(ModelSpec::weighted_bernoulli(1.0, 2.0, {Site{0}}), 1, 30);
    CHECK(fit_growth(log_mass_series(t2)).rate == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    lm.back() = -std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(fit_growth(lm), ExtinctError);
    const std::vector<double> shrt{0.0};
    CHECK_THROWS_AS(fit_growth(shrt), std::invalid_argument);
  }

  TEST_CASE("fit window") {
    const std::vector<double> times{0, 1, 2, 3};
    const std::vector<double> logs{5, 0, 1, 2};
    const auto f = fit_growth(times, logs, 0.5);
    CHECK(f.points == 2);
    CHECK(f.rate == doctest::Approx(1.0));
  }

  TEST_CASE("classify catalogued models") {
    const std::vector<double> grid{0.25, 0.5};
    const auto sup = classify(ModelSpec::site_op(0.8), grid, 100, 200, 5);
    CHECK(sup.verdict == Verdict::kCase2);
    CHECK(sup.two_site);
    const auto heavy = classify(ModelSpec::weighted_bernoulli(0.7, 1.5), grid, 100, 200, 5);
    CHECK(heavy.verdict == Verdict::kCase1);
    CHECK(heavy.c_hat[1].value > 0.0);
    const auto sub = classify(ModelSpec::site_op(0.1), grid, 100, 200, 5);
    CHECK(sub.verdict == Verdict::kCase3);
    CHECK(sub.survival.value == 0.0);
    const auto walk = classify(coalescing_walk(), grid, 100, 50, 5);
    CHECK(walk.verdict == Verdict::kCase3);
    CHECK_FALSE(walk.two_site);
    const auto j = to_json(heavy);
    CHECK(j["verdict"] == "case1");
    CHECK(j["c_delta"].size() == 2);
  }

  TEST_CASE("brute force path counts") {
    SampledEnvironment full(ModelSpec::site_op(1.0), 1);
    CHECK(brute_force_paths(full, 6, Site{0}) == 20);
    CHECK(brute_force_paths(full, 6, Site{1}) == 0);
    SampledEnvironment none(ModelSpec::site_op(0.0), 1);
    for (int n = 1; n <= 5; ++n) CHECK(brute_force_paths(none, n, Site{n % 2}) == 0);
    CHECK(brute_force_paths(none, 0, Site{0}) == 1);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto t = run<ExactArith>(ModelSpec::bond_op(0.6), seed, 10);
      for (int x = -10; x <= 10; ++x) {
        const auto* v = t.at(10).find(Site{x});
        CHECK((v ? *v : BigInt(0)) == brute_force_paths(*t.env, 10, Site{x}));
      }
    }
    SampledEnvironment weighted(ModelSpec::weighted_bernoulli(1.0, 2.0), 1);
    CHECK_THROWS_AS(brute_force_paths(weighted, 2, Site{0}), NonBinaryKernelError);
    CHECK_THROWS_AS(brute_force_paths(full, 15, Site{1}), std::invalid_argument);
  }

  TEST_CASE("growth run: coalescing walk keeps unit mass") {
    GrowthOptions o;
    o.horizon = 200;
    o.replicas = 10;
    const auto r = estimate_growth(coalescing_walk(), o);
    for (const auto& s : r.replicas) {
      CHECK(s.alive_horizon);
      CHECK(s.final_log_mass == doctest::Approx(0.0).epsilon(1e-12));
      REQUIRE(s.rate.has_value());
      CHECK(std::abs(s.rate->rate) <= 0.02);
    }
    CHECK(r.report.bound == 0.0);
    CHECK(*r.report.classifier == Verdict::kCase3);
  }

  TEST_CASE("growth run: rate beats the bound on survivors") {
    GrowthOptions o;
    o.delta = 0.4;
    o.horizon = 400;
    o.lookahead = 40;
    o.replicas = 30;
    o.seed = 17;
    const auto r = estimate_growth(ModelSpec::weighted_bernoulli(0.7, 1.5), o);
    CHECK(r.report.heavy_prob.value == doctest::Approx(0.7));
    CHECK(*r.report.classifier == Verdict::kCase1);
    int survivors = 0;
    for (const auto& s : r.replicas) {
      if (!s.rate) continue;
      ++survivors;
      CHECK(s.rate->rate >= r.report.bound - 0.05);
    }
    CHECK(survivors > 20);
    REQUIRE(r.report.fitted_rate.has_value());
    CHECK(r.report.fitted_rate->value > r.report.bound);
  }

  TEST_CASE("survival and growth coincide on catalogued models") {
    for (const auto& model : {ModelSpec::site_op(0.75), ModelSpec::bcpp_lse(0.8, 0.5)}) {
      GrowthOptions o;
      o.horizon = 1000;
      o.replicas = 40;
      o.seed = 23;
      const auto r = estimate_growth(model, o);
      int mismatch = 0;
      for (const auto& s : r.replicas) {
        const bool grows = s.rate && s.rate->rate > 0.02;
        if (grows != s.alive_horizon) ++mismatch;
      }
      CHECK(mismatch <= 2);
    }
  }

  TEST_CASE("reports are reproducible and thread independent") {
    GrowthOptions o;
    o.horizon = 120;
    o.replicas = 12;
    o.seed = 99;
    o.keep_snapshots = true;
    const auto a = estimate_growth(ModelSpec::bond_op(0.7), o);
    o.threads = 3;
    const auto b = estimate_growth(ModelSpec::bond_op(0.7), o);
    CHECK(to_json(a.report).dump() == to_json(b.report).dump());
    CHECK(report_csv_row(a.report) == report_csv_row(b.report));
    for (std::size_t i = 0; i < a.replicas.size(); ++i) {
      CHECK(a.replicas[i].snapshot_csv == b.replicas[i].snapshot_csv);
    }
  }

  TEST_CASE("report json carries the schema") {
    const auto r = c_delta(ModelSpec::weighted_bernoulli(1.0, 2.0), 1.0, 1, 10, 4, 1);
    const auto j = to_json(r);
    CHECK(j["schema_version"] == kReportSchemaVersion);
    CHECK(j["bound"].get<double>() == doctest::Approx(std::log(2.0)));
    CHECK(j.contains("tolerances"));
  }
}
