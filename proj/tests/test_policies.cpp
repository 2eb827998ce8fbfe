#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fairprice/catalog.hpp"
#include "fairprice/lower_bound.hpp"
#include "fairprice/policies.hpp"

using namespace fairprice;

namespace {

struct Tape : PeriodSink {
  std::vector<std::vector<double>> prices;
  std::vector<Stage> stages;
  void on_period(Stage stage, std::span<const double> p, std::span<const double>) override {
    prices.emplace_back(p.begin(), p.end());
    stages.push_back(stage);
  }
};

MarketInstance noiseless(const MarketInstance& inst) {
  return MarketInstance(inst.name + "-quiet", inst.curves, NoiseModel::noiseless());
}

ExplorationSchedule tiny_counts() {
  ExplorationSchedule s;
  s.c_trisect = 1e-12;
  s.c_checkpoint = 1e-12;
  return s;
}

FairnessSpec price_spec(const MarketInstance& inst, double lambda) {
  FairnessSpec spec;
  spec.measure = FairnessMeasure::for_instance(FairnessMeasure::Kind::Price, inst);
  spec.lambda = lambda;
  return spec;
}

}  // namespace

TEST_CASE("theoretical counts at unit multipliers") {
  const ExplorationSchedule s;
  const std::int64_t T = 100000;
  const double t = static_cast<double>(T);
  CHECK(s.trisect_count(T, 5.0, 2, false) ==
        static_cast<std::int64_t>(std::ceil(25.0 * 25.0 * std::pow(t, 0.8) * std::log(t))));
  CHECK(s.checkpoint_count(T, 2, false) ==
        static_cast<std::int64_t>(std::ceil(6.0 * std::pow(t, 0.4) * std::log(t))));
  CHECK(s.checkpoints(T, PriceInterval{0.0, 5.0}) == 50);
  CHECK(s.checkpoints(T, PriceInterval{1.0, 2.0}) == 10);
  CHECK(s.stop_width(T) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(s.slack(T) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(tiny_counts().trisect_count(T, 5.0, 2, false) == 1);
}

TEST_CASE("multi-group log factor") {
  for (std::int64_t T : {20000, 100000, 1000000}) {
    const ExplorationSchedule s;
    const double t = static_cast<double>(T);
    const double ratio = static_cast<double>(s.trisect_count(T, 5.0, 2, true)) /
                         static_cast<double>(s.trisect_count(T, 5.0, 2, false));
    CHECK(ratio == doctest::Approx(std::log(2.0 * t) / std::log(t)).epsilon(1e-6));
    const double ratio2 = static_cast<double>(s.checkpoint_count(T, 3, true)) /
                          static_cast<double>(s.checkpoint_count(T, 3, false));
    CHECK(ratio2 == doctest::Approx(std::log(3.0 * t) / std::log(t)).epsilon(1e-4));
  }
  // the same ratio measured in consumed periods
  const auto inst = noiseless(exp_paper_instance());
  ExplorationSchedule s;
  s.c_trisect = 1e-5;
  Environment a(inst, 100000, 1), b(inst, 100000, 1);
  const auto plain = explore_unconstrained(a, 0, s, false);
  const auto multi = explore_unconstrained(b, 0, s, true);
  REQUIRE(plain.iterations == multi.iterations);
  const double per_plain = static_cast<double>(plain.periods) / (2.0 * plain.iterations);
  const double per_multi = static_cast<double>(multi.periods) / (2.0 * multi.iterations);
  CHECK(per_multi / per_plain == doctest::Approx(std::log(2e5) / std::log(1e5)).epsilon(2e-3));
}

TEST_CASE("schedule validation") {
  ExplorationSchedule s;
  s.c_trisect = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = {};
  s.M_bar = 0.5;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK_THROWS_AS(checkpoint_grid(PriceInterval{0.0, 1.0}, 0), ConfigError);
  const auto g = checkpoint_grid(PriceInterval{0.0, 5.0}, 50);
  CHECK(g.size() == 50);
  CHECK(g.front() == doctest::Approx(0.1));
  CHECK(g.back() == 5.0);
}

TEST_CASE("trisection shrinks by exactly 2/3 and keeps its midpoint") {
  Rng gen(77);
  for (int trial = 0; trial < 40; ++trial) {
    const auto inst = trial % 2 ? exp_paper_instance() : linear_paper_instance();
    ExplorationSchedule s;
    s.c_trisect = 1e-6 * (1.0 + 9.0 * gen.uniform());
    const auto T = static_cast<std::int64_t>(20000 + gen.uniform() * 200000);
    Environment env(inst, T, gen.next());
    const auto r = explore_unconstrained(env, trial % 2, s);
    REQUIRE(r.widths.size() == static_cast<std::size_t>(r.iterations) + 1);
    for (std::size_t k = 1; k < r.widths.size(); ++k)
      CHECK(r.widths[k] / r.widths[k - 1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(r.estimate >= r.lo);
    CHECK(r.estimate <= r.hi);
    if (!r.exhausted) CHECK(r.hi - r.lo <= s.stop_width(T));
  }
}

TEST_CASE("trisection offers every price to all groups") {
  Tape tape;
  const auto inst = linear_three_group_instance();
  ExplorationSchedule s;
  s.c_trisect = 1e-6;
  Environment env(inst, 100000, 3, &tape);
  explore_unconstrained(env, 2, s);
  REQUIRE(!tape.prices.empty());
  for (const auto& p : tape.prices) {
    CHECK(p[0] == p[1]);
    CHECK(p[1] == p[2]);
  }
}

TEST_CASE("noise-off trisection lands within the stop width") {
  const std::int64_t T = 100000;
  const auto lb = make_lower_bound_pair(25.0, 0.005);
  for (const auto& raw : {exp_paper_instance(), linear_paper_instance(),
                          linear_three_group_instance(), lb.base, lb.alternative}) {
    const auto inst = noiseless(raw);
    for (std::size_t z = 0; z < inst.groups(); ++z) {
      Environment env(inst, T, 1);
      const auto r = explore_unconstrained(env, z, tiny_counts());
      CHECK_FALSE(r.exhausted);
      const double truth = unconstrained_optimum(inst.curves[z]);
      CHECK(std::abs(r.estimate - truth) <= tiny_counts().stop_width(T));
    }
  }
}

TEST_CASE("trisection with an interval already narrow enough") {
  ExplorationSchedule s;
  s.trisect_stop_width = 10.0;
  const auto inst = exp_paper_instance();
  Environment env(inst, 1000, 1);
  const auto r = explore_unconstrained(env, 0, s);
  CHECK(r.periods == 0);
  CHECK(r.estimate == 2.5);
  CHECK(env.elapsed() == 0);
}

TEST_CASE("trisection under budget exhaustion") {
  ExplorationSchedule s;
  const auto inst = exp_paper_instance();
  Environment env(inst, 500, 1);
  const auto r = explore_unconstrained(env, 0, s);
  CHECK(r.exhausted);
  CHECK(r.estimate == 2.5);
  CHECK(env.remaining() == 0);
}

TEST_CASE("constrained price stage") {
  const auto inst = noiseless(linear_paper_instance());
  const std::vector<double> hat{3.0, 4.0};
  SUBCASE("lambda = 0 gives equal prices") {
    Tape tape;
    Environment env(inst, 100000, 1, &tape);
    const auto r = explore_constrained_price(env, hat, 0.0, tiny_counts());
    for (const auto& p : tape.prices) CHECK(p[0] == p[1]);
    CHECK(r.prices[0] == r.prices[1]);
  }
  SUBCASE("noise-off linear pair at lambda = 0.5") {
    auto s = tiny_counts();
    s.xi_slack = 0.0;
    s.checkpoint_count_scale = 4.0;
    Environment env(inst, 100000, 1);
    const auto r = explore_constrained_price(env, hat, 0.5, s);
    const double cell = 5.0 / 200.0;
    CHECK(r.completed == 200);
    CHECK(std::abs(r.prices[0] - 3.25) <= cell);
    CHECK(std::abs(r.prices[1] - 3.75) <= cell);
    CHECK(std::abs(r.prices[1] - r.prices[0]) <= 0.5 * r.xi + 1e-12);
  }
  SUBCASE("estimates closer than the slack collapse the gap") {
    Tape tape;
    Environment env(inst, 100000, 1, &tape);
    const std::vector<double> close{3.0, 3.5};
    const auto r = explore_constrained_price(env, close, 1.0, tiny_counts());
    CHECK(r.xi == 0.0);
    CHECK(r.prices[0] == r.prices[1]);
    for (const auto& p : tape.prices) CHECK(p[0] == p[1]);
  }
  SUBCASE("lower price goes to the group with the smaller estimate") {
    Tape tape;
    Environment env(inst, 100000, 1, &tape);
    const std::vector<double> swapped{4.5, 1.0};
    auto s = tiny_counts();
    s.xi_slack = 0.0;
    explore_constrained_price(env, swapped, 0.5, s);
    for (const auto& p : tape.prices) CHECK(p[1] <= p[0]);
  }
  SUBCASE("exhaustion keeps the best completed checkpoint") {
    ExplorationSchedule s;
    s.c_checkpoint = 1.0;
    Environment env(inst, 100000, 1);
    const auto r = explore_constrained_price(env, hat, 0.5, s);
    CHECK(r.exhausted);
    CHECK(r.completed > 0);
    CHECK(r.best_index >= 0);
    CHECK(r.best_index < r.completed);
    Environment none(inst, 10, 1);
    const auto d = explore_constrained_price(none, hat, 0.5, s);
    CHECK(d.degenerate);
    CHECK(d.prices[0] == d.prices[1]);
  }
}

TEST_CASE("general-measure stage") {
  const auto inst = noiseless(linear_paper_instance());
  const std::vector<double> hat{3.0, 4.0};
  const FairnessMeasure price = FairnessMeasure::for_instance(FairnessMeasure::Kind::Price, inst);
  const FairnessMeasure demand = FairnessMeasure::demand();
  auto s = tiny_counts();
  s.checkpoint_count_scale = 2.0;  // J = 100, cell 0.05
  SUBCASE("gamma = 0 gives per-group argmaxes") {
    Environment env(inst, 100000, 1);
    const auto r = explore_constrained_general(env, hat, demand, 0.5, 0.0, s);
    const auto grid = checkpoint_grid(inst.domain(), 100);
    for (std::size_t i = 0; i < 2; ++i) {
      double best = -1e300, arg = 0.0;
      for (double p : grid) {
        const double v = inst.curves[i].revenue(p);
        if (v > best) best = v, arg = p;
      }
      CHECK(r.prices[i] == arg);
    }
  }
  SUBCASE("large gamma under the price measure enforces the anchor gap") {
    Environment env(inst, 100000, 1);
    const auto r = explore_constrained_general(env, hat, price, 0.5, 1e3, s);
    CHECK(std::abs(r.prices[0] - r.prices[1]) <= 0.5 * 1.0 + 1e-9);
    // exhaustive evaluation of the finite-gamma objective on true values
    const auto grid = checkpoint_grid(inst.domain(), 100);
    double best = -1e300;
    std::pair<double, double> arg;
    for (double a : grid)
      for (double b : grid) {
        const double g = inst.curves[0].revenue(a) + inst.curves[1].revenue(b) -
                         1e3 * std::max(std::abs(a - b) - 0.5 * std::abs(grid[59] - grid[79]), 0.0);
        if (g > best) best = g, arg = {a, b};
      }
    CHECK(r.prices[0] == arg.first);
    CHECK(r.prices[1] == arg.second);
  }
  SUBCASE("symmetric groups") {
    const MarketInstance twin("twin", {inst.curves[0], inst.curves[0]}, NoiseModel::noiseless());
    Environment env(twin, 100000, 1);
    const std::vector<double> same{3.0, 3.0};
    const auto r = explore_constrained_general(env, same, demand, 0.5, 1.0, s);
    CHECK(std::abs(r.prices[0] - r.prices[1]) <= 0.05 + 1e-12);
  }
  SUBCASE("estimates round to the nearest checkpoint, ties down") {
    // J = 10 on [0, 5]; 0.75 is midway between 0.5 and 1.0
    auto coarse = tiny_counts();
    coarse.checkpoint_count_scale = 0.2;
    Environment env(inst, 100000, 1);
    const std::vector<double> mid{0.75, 0.75};
    const auto r = explore_constrained_general(env, mid, price, 0.0, 1e6, coarse);
    CHECK(r.prices[0] == r.prices[1]);
  }
  SUBCASE("every checkpoint is offered to both groups") {
    Tape tape;
    Environment env(inst, 100000, 1, &tape);
    explore_constrained_general(env, hat, demand, 0.5, 1.0, s);
    for (const auto& p : tape.prices) CHECK(p[0] == p[1]);
  }
  SUBCASE("three groups use the flattened tuple index") {
    const auto three = noiseless(linear_three_group_instance());
    auto c = tiny_counts();
    c.checkpoint_count_scale = 0.2;
    Environment env(three, 100000, 1);
    const std::vector<double> h3{3.0, 3.5, 4.0};
    const auto r = explore_constrained_general(env, h3, demand, 1.0, 0.0, c, true);
    const auto grid = checkpoint_grid(three.domain(), 10);
    std::size_t flat = 0;
    for (double p : r.prices) {
      const auto idx = static_cast<std::size_t>(std::find(grid.begin(), grid.end(), p) - grid.begin());
      REQUIRE(idx < grid.size());
      flat = flat * grid.size() + idx;
    }
    CHECK(static_cast<std::size_t>(r.best_index) == flat);
  }
}

TEST_CASE("multi-group window stage") {
  const auto inst = noiseless(linear_paper_instance());
  SUBCASE("two groups outside the window match the price stage") {
    const std::vector<double> hat{0.2, 4.8};
    Tape a, b;
    Environment ea(inst, 100000, 1, &a), eb(inst, 100000, 1, &b);
    explore_constrained_price(ea, hat, 0.5, tiny_counts());
    explore_constrained_multi(eb, hat, 0.5, tiny_counts(), false);
    REQUIRE(a.prices.size() == b.prices.size());
    const double half = 0.5 * (4.6 - tiny_counts().slack(100000)) / 2.0;
    const auto grid = checkpoint_grid(inst.domain(), 50);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      if (hat[0] <= grid[j] - half && hat[1] >= grid[j] + half) {
        CHECK(a.prices[j][0] == b.prices[j][0]);
        CHECK(a.prices[j][1] == b.prices[j][1]);
      }
    }
  }
  SUBCASE("wide window passes the estimates through") {
    const auto three = noiseless(linear_three_group_instance());
    Tape tape;
    auto s = tiny_counts();
    s.xi_slack = 0.0;
    Environment env(three, 100000, 1, &tape);
    const std::vector<double> hat{3.0, 3.5, 4.0};
    explore_constrained_multi(env, hat, 1.0, s);
    // checkpoint 35 is l = 3.5, window (3, 4) open: the end estimates clamp onto it
    const auto& p = tape.prices[34];
    CHECK(p[1] == 3.5);
    CHECK(p[0] == doctest::Approx(3.0));
    CHECK(p[2] == doctest::Approx(4.0));
    CHECK(std::abs(p[2] - p[0]) <= 1.0 + 1e-12);
  }
  SUBCASE("equal estimates give equal prices everywhere") {
    const auto three = noiseless(linear_three_group_instance());
    Tape tape;
    Environment env(three, 100000, 1, &tape);
    const std::vector<double> hat{2.0, 2.0, 2.0};
    explore_constrained_multi(env, hat, 0.7, tiny_counts());
    for (const auto& p : tape.prices) {
      CHECK(p[0] == p[1]);
      CHECK(p[1] == p[2]);
    }
  }
  SUBCASE("window width never exceeds lambda xi") {
    Rng gen(9);
    const auto three = linear_three_group_instance();
    for (int k = 0; k < 20; ++k) {
      Tape tape;
      Environment env(three, 50000, gen.next(), &tape);
      const std::vector<double> hat{5.0 * gen.uniform(), 5.0 * gen.uniform(), 5.0 * gen.uniform()};
      const double lambda = gen.uniform();
      const auto r = explore_constrained_multi(env, hat, lambda, tiny_counts());
      for (const auto& p : tape.prices) {
        const auto [mn, mx] = std::minmax_element(p.begin(), p.end());
        CHECK(*mx - *mn <= lambda * r.xi + 1e-12);
      }
    }
  }
}

TEST_CASE("discrepancy stage") {
  const auto inst = noiseless(linear_paper_instance());
  const std::vector<double> hat{3.0, 4.0};
  auto s = tiny_counts();
  s.xi_slack = 0.0;
  SUBCASE("difference") {
    Tape tape;
    Environment env(inst, 100000, 1, &tape);
    const auto r = explore_constrained_discrepancy(env, hat, DiscrepancyFunction::difference(), 0.5, s);
    CHECK(r.xi == doctest::Approx(1.0));
    const auto grid = checkpoint_grid(inst.domain(), 50);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      CHECK(tape.prices[j][0] == grid[j]);
      CHECK(tape.prices[j][1] == doctest::Approx(std::min(5.0, grid[j] + 0.5)).epsilon(1e-12));
    }
  }
  SUBCASE("log ratio") {
    const auto f = DiscrepancyFunction::log_ratio(0.0);
    CHECK(f.inverse(2.0, std::log(1.5)).value() == doctest::Approx(3.0).epsilon(1e-9));
    Tape tape;
    Environment env(inst, 100000, 1, &tape);
    const std::vector<double> ratio_hat{2.0, 3.0};
    const auto r = explore_constrained_discrepancy(env, ratio_hat, f, 1.0, s);
    CHECK(r.xi == doctest::Approx(std::log(1.5)).epsilon(1e-12));
    // checkpoint 20 is l = 2
    CHECK(tape.prices[19][0] == 2.0);
    CHECK(tape.prices[19][1] == doctest::Approx(3.0).epsilon(1e-9));
  }
  SUBCASE("lambda = 0") {
    Tape tape;
    Environment env(inst, 100000, 1, &tape);
    explore_constrained_discrepancy(env, hat, DiscrepancyFunction::difference(), 0.0, s);
    for (const auto& p : tape.prices) CHECK(p[0] == p[1]);
  }
}

TEST_CASE("FDP-DL pipeline") {
  SUBCASE("noise off, lambda = 1, generous schedule commits near the unconstrained optimum") {
    const auto inst = noiseless(exp_paper_instance());
    auto s = tiny_counts();
    s.trisect_stop_width = 1e-3;
    s.xi_slack = 2e-3;
    Environment env(inst, 100000, 1);
    const auto out = run_fdp_dl(env, 1.0, s);
    REQUIRE(out.committed.size() == 2);
    const double cell = 5.0 / 50.0;
    CHECK(std::abs(out.committed[0] - 1.0) <= cell);
    CHECK(std::abs(out.committed[1] - 2.0) <= cell);
    CHECK(out.stage1_periods + out.stage2_periods + out.stage3_periods == 100000);
  }
  SUBCASE("short horizon is all Stage I") {
    Tape tape;
    ExplorationSchedule s;
    const auto inst = exp_paper_instance();
    Environment env(inst, 3000, 4, &tape);
    const auto out = run_fdp_dl(env, 0.5, s);
    CHECK(out.committed.empty());
    CHECK(tape.prices.size() == 3000);
    for (std::size_t t = 0; t < tape.prices.size(); ++t) {
      CHECK(tape.stages[t] == Stage::I);
      CHECK(tape.prices[t][0] == tape.prices[t][1]);
    }
  }
  SUBCASE("price gap bounded by lambda xi after Stage I") {
    Rng gen(21);
    ExplorationSchedule s;
    s.c_trisect = 1.4e-5;
    s.c_checkpoint = 0.05;
    const auto inst = exp_paper_instance();
    for (int k = 0; k < 10; ++k) {
      Tape tape;
      const double lambda = 0.2 + 0.6 * gen.uniform();
      Environment env(inst, 50000, gen.next(), &tape);
      const auto out = run_fdp_dl(env, lambda, s);
      for (std::size_t t = 0; t < tape.prices.size(); ++t) {
        const double gap = std::abs(tape.prices[t][0] - tape.prices[t][1]);
        if (tape.stages[t] == Stage::I) CHECK(gap == 0.0);
        else CHECK(gap <= lambda * out.stage2.xi + 1e-12);
      }
    }
  }
}

TEST_CASE("baselines") {
  SUBCASE("noise-off commits near the best single price") {
    const auto inst = noiseless(exp_paper_instance());
    double best = -1e300, arg = 0.0;
    for (int k = 0; k <= 50000; ++k) {
      const double p = k * 1e-4;
      const std::vector<double> v{p, p};
      if (inst.total_revenue(v) > best) best = inst.total_revenue(v), arg = p;
    }
    Environment e1(inst, 100000, 1);
    const auto tri = run_baseline(e1, BaselineVariant::TrisectionSamePrice, ExplorationSchedule{});
    REQUIRE(tri.committed.size() == 2);
    CHECK(std::abs(tri.committed[0] - arg) <= 0.05);
    Environment e2(inst, 100000, 1);
    const auto etc = run_baseline(e2, BaselineVariant::EtcSamePrice, ExplorationSchedule{});
    REQUIRE(etc.committed.size() == 2);
    CHECK(std::abs(etc.committed[0] - arg) <= 5.0 / 47.0);
  }
  SUBCASE("same price every period") {
    const auto three = linear_three_group_instance();
    for (auto v : {BaselineVariant::TrisectionSamePrice, BaselineVariant::EtcSamePrice}) {
      Tape tape;
      Environment env(three, 30000, 2, &tape);
      run_baseline(env, v, ExplorationSchedule{});
      CHECK(tape.prices.size() == 30000);
      for (const auto& p : tape.prices) {
        CHECK(p[0] == p[1]);
        CHECK(p[1] == p[2]);
      }
    }
  }
  SUBCASE("single-price gap under fairness") {
    const auto inst = exp_paper_instance();
    const auto sol = solve_clairvoyant(inst, price_spec(inst, 0.8));
    double best = -1e300;
    for (int k = 0; k <= 50000; ++k) {
      const std::vector<double> v{k * 1e-4, k * 1e-4};
      best = std::max(best, inst.total_revenue(v));
    }
    CHECK(sol.revenue_star - best > 0.01);
  }
}

TEST_CASE("budget conservation over random policies and horizons") {
  Rng gen(2025);
  const auto pols = all_policies();
  for (int k = 0; k < 60; ++k) {
    const auto id = pols[gen.next() % pols.size()];
    const auto inst = id == PolicyId::FdpMulti || id == PolicyId::FdpGfmMulti
                          ? linear_three_group_instance()
                          : (k % 2 ? exp_paper_instance() : linear_paper_instance());
    auto spec = price_spec(inst, gen.uniform());
    if (is_soft_policy(id)) spec.mode = ConstraintMode::Soft;
    ExplorationSchedule s;
    s.c_trisect = 1e-6 + 3e-5 * gen.uniform();
    s.c_checkpoint = 0.01 + 0.2 * gen.uniform();
    const auto T = static_cast<std::int64_t>(1 + gen.next() % 60000);
    const auto sol = solve_clairvoyant(inst, spec);
    Tape tape;
    Environment env(inst, T, gen.next(), &tape);
    const auto out = run_policy(id, env, spec, s, &sol);
    CAPTURE(policy_name(id));
    CAPTURE(T);
    CHECK(env.elapsed() == T);
    CHECK(static_cast<std::int64_t>(tape.prices.size()) == T);
    CHECK(out.stage1_periods + out.stage2_periods + out.stage3_periods == T);
  }
}

TEST_CASE("policy names round-trip") {
  for (auto id : all_policies()) CHECK(parse_policy(policy_name(id)) == id);
  CHECK_THROWS_AS(parse_policy("ucb"), ConfigError);
  CHECK(is_soft_policy(PolicyId::FdpGfm));
  CHECK(is_baseline(PolicyId::BaselineEtc));
  CHECK(is_diagnostic(PolicyId::OracleReplay));
}

TEST_CASE("environment") {
  const auto inst = linear_paper_instance();
  Environment env(inst, 2, 1);
  const std::vector<double> bad{6.0, 1.0};
  CHECK_THROWS_AS(env.post(bad), DomainError);
  const std::vector<double> wrong{1.0};
  CHECK_THROWS_AS(env.post(wrong), ConfigError);
  env.post_uniform(1.0);
  env.post_uniform(5.0 + 1e-10);
  CHECK_THROWS_AS(env.post_uniform(1.0), BudgetExhausted);
  CHECK(std::string(to_string(Stage::II)) == "II");
}
