#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fairprice/catalog.hpp"
#include "fairprice/demand.hpp"
#include "fairprice/fairness.hpp"

using namespace fairprice;

namespace {

const PriceInterval kWide{0.0, 5.0};

DemandCurve exp1() { return DemandCurve(curves::Exponential{0.5, 1.0, 1.0}, kWide); }
DemandCurve lin1() { return DemandCurve(curves::Linear{-0.1, 0.6}, kWide); }

}  // namespace

TEST_CASE("closed-form demand values") {
  CHECK(eval_demand(exp1(), 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(eval_demand(lin1(), 3.0) == doctest::Approx(0.3).epsilon(1e-15));
  DemandCurve inv(curves::InverseProportional{2.0}, kWide);
  CHECK(eval_demand(inv, 1.0) == 1.0);
  CHECK(eval_demand(inv, 0.5) == 1.0);
  CHECK(eval_demand(inv, 4.0) == 0.0);
  CHECK_FALSE(inv.regular());
  CHECK(exp1().regular());
}

TEST_CASE("revenue values") {
  CHECK(eval_revenue(lin1(), 3.0) == doctest::Approx(0.9).epsilon(1e-14));
  DemandCurve costly(curves::Linear{-0.1, 0.6}, kWide, 1.5);
  CHECK(eval_revenue(costly, 1.5) == 0.0);
  DemandCurve r3(curves::LowerBound{curves::LbProfile::R3, 10.0, 0.01}, PriceInterval{1.0, 2.0});
  CHECK(eval_revenue(r3, 2.0) == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(eval_demand(lin1(), 5.5), DomainError);
  CHECK_THROWS_AS(eval_revenue(lin1(), -0.1), DomainError);
  CHECK_THROWS_AS(PriceInterval(2.0, 1.0), ConfigError);
  CHECK_THROWS_AS(PriceInterval(-1.0, 1.0), ConfigError);
}

TEST_CASE("degenerate bernoulli draws") {
  Rng rng(7);
  const auto noise = NoiseModel::bernoulli();
  for (int i = 0; i < 1000; ++i) {
    CHECK(sample_from_mean(1.0, noise, rng) == 1.0);
    CHECK(sample_from_mean(0.0, noise, rng) == 0.0);
  }
}

TEST_CASE("bernoulli sample mean at d = 0.3") {
  DemandCurve flat(curves::Tabulated{{0.0, 5.0}, {0.3, 0.3}}, kWide);
  Rng rng(2024);
  const auto noise = NoiseModel::bernoulli();
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = sample_demand(flat, 2.0, noise, rng);
    REQUIRE((d == 0.0 || d == 1.0));
    sum += d;
  }
  CHECK(std::abs(sum / n - 0.3) <= 0.002);
}

TEST_CASE("sample mean within 4 sigma in at least 99% of seeded runs") {
  const auto curve = exp1();
  const auto noise = NoiseModel::bernoulli();
  int inside = 0;
  const int runs = 200;
  const int n = 2000;
  for (int run = 0; run < runs; ++run) {
    Rng rng(1000 + run);
    const double p = 0.25 * (run % 20);
    const double d = curve.demand(p);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_demand(curve, p, noise, rng);
    if (std::abs(sum / n - d) <= 4.0 * std::sqrt(d * (1.0 - d) / n)) ++inside;
  }
  CHECK(inside >= 198);
}

TEST_CASE("truncated additive noise") {
  Rng rng(3);
  const auto noise = NoiseModel::truncated_additive(0.05);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double d = sample_from_mean(0.5, noise, rng);
    REQUIRE(d >= 0.0);
    REQUIRE(d <= 1.0);
    sum += d;
  }
  CHECK(std::abs(sum / n - 0.5) < 1e-3);
  Rng quiet(4);
  CHECK(sample_from_mean(0.37, NoiseModel::noiseless(), quiet) == 0.37);
  CHECK_THROWS_AS(NoiseModel::truncated_additive(-1.0), ConfigError);
}

TEST_CASE("sampling is deterministic given the seed") {
  Rng a(99), b(99);
  const auto curve = lin1();
  for (int i = 0; i < 500; ++i)
    CHECK(sample_demand(curve, 2.0, NoiseModel::bernoulli(), a) ==
          sample_demand(curve, 2.0, NoiseModel::bernoulli(), b));
}

TEST_CASE("fairness measures") {
  const auto curve = exp1();
  const auto price = FairnessMeasure::price(5.0);
  const auto demand = FairnessMeasure::demand();
  CHECK(observe_measure(price, curve, 2.5, 0.0) == 2.5);
  CHECK(observe_measure(demand, curve, 2.5, 1.0) == 1.0);
  CHECK(price.true_value(curve, 2.5) == 2.5);
  CHECK(demand.true_value(curve, 1.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(observe_measure(FairnessMeasure::price(1.0), curve, 2.5, 0.0), DomainError);
}

TEST_CASE("demand measure is unbiased and a pass-through") {
  const auto curve = exp1();
  const auto measure = FairnessMeasure::demand();
  Rng rng(11);
  const double p = 1.7;
  double realized = 0.0, observed = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double d = sample_demand(curve, p, NoiseModel::bernoulli(), rng);
    realized += d;
    observed += observe_measure(measure, curve, p, d);
  }
  CHECK(observed == realized);
  CHECK(std::abs(observed / n - curve.demand(p)) <= 0.01);
}

TEST_CASE("discrepancy functions") {
  const auto diff = DiscrepancyFunction::difference();
  const auto logr = DiscrepancyFunction::log_ratio(0.0);
  for (double x : {0.5, 1.0, 2.0, 4.5}) {
    CHECK(diff(x, x) == 0.0);
    CHECK(logr(x, x) == 0.0);
  }
  const auto y = logr.inverse(2.0, std::log(1.5));
  REQUIRE(y.has_value());
  CHECK(*y == doctest::Approx(3.0).epsilon(1e-9));
  const auto z = diff.inverse(1.0, 0.75);
  REQUIRE(z.has_value());
  CHECK(*z > 1.0);
  CHECK(std::abs(std::abs(diff(1.0, *z)) - 0.75) <= 1e-9);
  CHECK(diff.inverse(1.0, 0.0).value() == 1.0);
  CHECK_FALSE(diff.inverse(1.0, 10.0, 5.0).has_value());
}

TEST_CASE("strict monotonicity and Lipschitz bound of regular built-ins") {
  for (const auto& instance : {linear_paper_instance(), linear_three_group_instance()}) {
    for (const auto& curve : instance.curves) {
      REQUIRE(curve.regular());
      const auto scan = scan_regularity(curve, 1e-3);
      CHECK(scan.strictly_decreasing);
      CHECK(scan.max_slope <= 1.0);
      CHECK(scan.min_slope > 0.0);
    }
  }
  // exp-paper group 1 saturates at d = 1 below p = 1 - ln 2; strictness holds above it
  const auto exp_pair = exp_paper_instance();
  const double knee = 1.0 - std::log(2.0);
  CHECK(exp_pair.curves[0].demand(knee / 2.0) == 1.0);
  for (const auto& curve : exp_pair.curves) {
    REQUIRE(curve.regular());
    const DemandCurve tail(curve.kind(), PriceInterval{knee + 1e-9, 5.0}, curve.cost());
    const auto scan = scan_regularity(tail, 1e-3);
    CHECK(scan.strictly_decreasing);
    CHECK(scan.max_slope <= 1.0);
  }
  Rng rng(5);
  for (const auto& curve : exp_pair.curves) {
    for (int i = 0; i < 2000; ++i) {
      const double p = 5.0 * rng.uniform();
      const double q = 5.0 * rng.uniform();
      CHECK(std::abs(curve.demand(p) - curve.demand(q)) <= std::abs(p - q));
      if (p == q || std::max(p, q) <= knee) continue;
      CHECK((curve.demand(p) - curve.demand(q)) * (p - q) < 0.0);
    }
  }
}

TEST_CASE("demand stays inside [0, 1]") {
  Rng rng(17);
  for (const auto& instance : {exp_paper_instance(), linear_paper_instance(),
                               invprop_paper_instance()}) {
    for (const auto& curve : instance.curves) {
      for (int i = 0; i < 1000; ++i) {
        const double d = curve.demand(5.0 * rng.uniform());
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
      }
    }
  }
}

TEST_CASE("market instance validation") {
  CHECK_THROWS_AS(MarketInstance("one", {lin1()}), ConfigError);
  DemandCurve other(curves::Linear{-0.1, 0.8}, PriceInterval{0.0, 4.0});
  CHECK_THROWS_AS(MarketInstance("mixed", {lin1(), other}), ConfigError);
  const auto inst = linear_paper_instance();
  const std::vector<double> prices{3.0, 4.0};
  CHECK(inst.total_revenue(prices) == doctest::Approx(0.9 + 1.6));
}

TEST_CASE("curve parsing") {
  const auto k = parse_curve_kind("linear(-0.1, 0.6)");
  REQUIRE(std::holds_alternative<curves::Linear>(k));
  CHECK(std::get<curves::Linear>(k).intercept == 0.6);
  CHECK(std::holds_alternative<curves::Exponential>(parse_curve_kind("exponential(0.5, 1)")));
  CHECK(std::holds_alternative<curves::LowerBound>(parse_curve_kind("lb(R2, 20, 0.005)")));
  CHECK(std::holds_alternative<curves::Tabulated>(parse_curve_kind("tabulated(0:1, 2.5:0.5, 5:0)")));
  CHECK_THROWS_AS(parse_curve_kind("cubic(1)"), ConfigError);
  CHECK_THROWS_AS(parse_curve_kind("lb(R4, 20, 0.005)"), ConfigError);
}

TEST_CASE("tabulated curves interpolate and forbid extrapolation") {
  DemandCurve tab(curves::Tabulated{{1.0, 2.0, 3.0}, {0.9, 0.5, 0.1}}, PriceInterval{1.0, 3.0});
  CHECK(tab.demand(1.5) == doctest::Approx(0.7));
  CHECK(tab.regular());
  CHECK_THROWS(DemandCurve(curves::Tabulated{{1.0, 2.0}, {0.9, 0.5}}, PriceInterval{0.5, 3.0}));
}
