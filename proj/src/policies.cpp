#include "fairprice/policies.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fairprice {

namespace {

// Rounds up x except when it already sits on an integer up to float noise.
std::int64_t ceil_count(double x) {
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(x - 1e-9)));
}

double log_factor(std::int64_t T, std::size_t groups, bool multi_group_log) {
  const double t = static_cast<double>(T);
  return std::log(multi_group_log ? static_cast<double>(groups) * t : t);
}

// Accumulates per-group sums over one block of identical posts.
struct Block {
  std::vector<double> demand_sum;
  std::int64_t count = 0;
  bool complete = false;
};

// Posts `prices` `n` times; on exhaustion the partial block is reported incomplete.
Block sample_block(Environment& env, std::span<const double> prices, std::int64_t n) {
  Block block;
  block.demand_sum.assign(env.groups(), 0.0);
  try {
    for (std::int64_t k = 0; k < n; ++k) {
      auto d = env.post(prices);
      for (std::size_t i = 0; i < d.size(); ++i) block.demand_sum[i] += d[i];
      ++block.count;
    }
    block.complete = true;
  } catch (const BudgetExhausted&) {
    block.complete = false;
  }
  return block;
}

double empirical_revenue(const Block& block, std::span<const double> prices, double cost) {
  double total = 0.0;
  for (std::size_t i = 0; i < prices.size(); ++i)
    total += (prices[i] - cost) * (block.demand_sum[i] / static_cast<double>(block.count));
  return total;
}

std::size_t lower_group(std::span<const double> p_sharp_hat) {
  return p_sharp_hat[1] < p_sharp_hat[0] ? 1 : 0;
}

// Shared Stage II loop: `assign` fills the price vector for checkpoint j (0-based)
// and returns false to skip it.
template <class Assign>
CheckpointResult run_checkpoints(Environment& env, const std::vector<double>& grid,
                                 std::int64_t count, Assign assign) {
  CheckpointResult result;
  const std::int64_t start = env.elapsed();
  std::vector<double> prices(env.groups());
  double best = -INFINITY;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (!assign(j, prices)) {
      ++result.skipped;
      continue;
    }
    const Block block = sample_block(env, prices, count);
    if (!block.complete) {
      result.exhausted = true;
      break;
    }
    ++result.completed;
    const double value = empirical_revenue(block, prices, env.cost());
    if (value > best) {
      best = value;
      result.best_index = static_cast<int>(j);
      result.prices = prices;
    }
  }
  if (result.best_index < 0) {
    result.degenerate = true;
    result.prices.assign(env.groups(), grid.front());
  }
  result.periods = env.elapsed() - start;
  return result;
}

}  // namespace

void ExplorationSchedule::validate() const {
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError(std::string("schedule.") + key + ": must be > 0");
  };
  positive(c_trisect, "c_trisect");
  positive(c_checkpoint, "c_checkpoint");
  positive(checkpoint_count_scale, "checkpoint_count_scale");
  positive(K, "K");
  positive(C, "C");
  positive(K_prime, "K_prime");
  positive(c_baseline, "c_baseline");
  if (!(M_bar >= 1.0)) throw ConfigError("schedule.M_bar: must be >= 1");
  if (trisect_stop_width) positive(*trisect_stop_width, "trisect_stop_width");
  if (xi_slack && !(*xi_slack >= 0.0)) throw ConfigError("schedule.xi_slack: must be >= 0");
}

std::string ExplorationSchedule::describe() const {
  std::ostringstream out;
  out.precision(17);
  out << "c_trisect=" << c_trisect << ";c_checkpoint=" << c_checkpoint << ";stop=";
  if (trisect_stop_width) out << *trisect_stop_width;
  else out << "default";
  out << ";xi_slack=";
  if (xi_slack) out << *xi_slack;
  else out << "default";
  out << ";J_scale=" << checkpoint_count_scale << ";K=" << K << ";C=" << C << ";K_prime=" << K_prime
      << ";M_bar=" << M_bar << ";c_baseline=" << c_baseline;
  return out.str();
}

std::int64_t ExplorationSchedule::trisect_count(std::int64_t T, double pmax, std::size_t groups,
                                                bool multi_group_log) const {
  const double base = 25.0 * std::pow(K, 4) * pmax * pmax / (C * C);
  return ceil_count(c_trisect * base * std::pow(static_cast<double>(T), 0.8) *
                    log_factor(T, groups, multi_group_log));
}

std::int64_t ExplorationSchedule::checkpoint_count(std::int64_t T, std::size_t groups,
                                                   bool multi_group_log) const {
  return ceil_count(c_checkpoint * 6.0 * std::pow(static_cast<double>(T), 0.4) *
                    log_factor(T, groups, multi_group_log));
}

std::int64_t ExplorationSchedule::checkpoints(std::int64_t T, const PriceInterval& domain) const {
  return ceil_count(checkpoint_count_scale * domain.width() *
                    std::pow(static_cast<double>(T), 0.2));
}

double ExplorationSchedule::stop_width(std::int64_t T) const {
  return trisect_stop_width.value_or(4.0 * std::pow(static_cast<double>(T), -0.2));
}

double ExplorationSchedule::slack(std::int64_t T) const {
  return xi_slack.value_or(8.0 * std::pow(static_cast<double>(T), -0.2));
}

std::vector<double> checkpoint_grid(const PriceInterval& domain, std::int64_t J) {
  if (J < 1) throw ConfigError("checkpoints: J must be >= 1");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(J));
  for (std::int64_t j = 1; j <= J; ++j) {
    grid.push_back(j == J ? domain.hi
                          : domain.lo + (static_cast<double>(j) / static_cast<double>(J)) *
                                            domain.width());
  }
  return grid;
}

TrisectionResult explore_unconstrained(Environment& env, std::size_t z,
                                       const ExplorationSchedule& schedule,
                                       bool multi_group_log) {
  if (z >= env.groups()) throw ConfigError("explore_unconstrained: group index out of range");
  const std::int64_t T = env.horizon();
  const auto& dom = env.domain();
  const std::int64_t n = schedule.trisect_count(T, dom.hi, env.groups(), multi_group_log);
  const double stop = schedule.stop_width(T);
  const double cost = env.cost();
  const std::int64_t start = env.elapsed();

  TrisectionResult result;
  double lo = dom.lo;
  double hi = dom.hi;
  result.widths.push_back(hi - lo);
  std::vector<double> prices(env.groups());
  while (hi - lo > stop) {
    const double m1 = (2.0 * lo + hi) / 3.0;
    const double m2 = (lo + 2.0 * hi) / 3.0;
    std::fill(prices.begin(), prices.end(), m1);
    const Block b1 = sample_block(env, prices, n);
    if (!b1.complete) {
      result.exhausted = true;
      break;
    }
    std::fill(prices.begin(), prices.end(), m2);
    const Block b2 = sample_block(env, prices, n);
    if (!b2.complete) {
      result.exhausted = true;
      break;
    }
    const double r1 = (m1 - cost) * (b1.demand_sum[z] / static_cast<double>(n));
    const double r2 = (m2 - cost) * (b2.demand_sum[z] / static_cast<double>(n));
    if (r1 > r2) hi = m2;
    else lo = m1;
    ++result.iterations;
    result.widths.push_back(hi - lo);
  }
  result.lo = lo;
  result.hi = hi;
  result.estimate = 0.5 * (lo + hi);
  result.periods = env.elapsed() - start;
  return result;
}

CheckpointResult explore_constrained_price(Environment& env, std::span<const double> p_sharp_hat,
                                           double lambda, const ExplorationSchedule& schedule) {
  if (env.groups() != 2 || p_sharp_hat.size() != 2)
    throw ConfigError("explore_constrained_price: needs exactly 2 groups");
  const std::int64_t T = env.horizon();
  const auto& dom = env.domain();
  const double xi = std::max(std::abs(p_sharp_hat[0] - p_sharp_hat[1]) - schedule.slack(T), 0.0);
  const double half = lambda * xi / 2.0;
  const std::size_t low = lower_group(p_sharp_hat);
  const auto grid = checkpoint_grid(dom, schedule.checkpoints(T, dom));
  auto result = run_checkpoints(env, grid, schedule.checkpoint_count(T, 2, false),
                                [&](std::size_t j, std::vector<double>& prices) {
                                  prices[low] = std::max(dom.lo, grid[j] - half);
                                  prices[1 - low] = std::min(dom.hi, grid[j] + half);
                                  return true;
                                });
  result.xi = xi;
  return result;
}

CheckpointResult explore_constrained_multi(Environment& env, std::span<const double> p_sharp_hat,
                                           double lambda, const ExplorationSchedule& schedule,
                                           bool multi_group_log) {
  const std::size_t n = env.groups();
  if (p_sharp_hat.size() != n) throw ConfigError("explore_constrained_multi: one estimate per group");
  const std::int64_t T = env.horizon();
  const auto& dom = env.domain();
  const auto [mn, mx] = std::minmax_element(p_sharp_hat.begin(), p_sharp_hat.end());
  const double xi = std::max(*mx - *mn - schedule.slack(T), 0.0);
  const double half = lambda * xi / 2.0;
  const auto grid = checkpoint_grid(dom, schedule.checkpoints(T, dom));
  auto result = run_checkpoints(
      env, grid, schedule.checkpoint_count(T, n, multi_group_log),
      [&](std::size_t j, std::vector<double>& prices) {
        const double left = grid[j] - half;
        const double right = grid[j] + half;
        for (std::size_t z = 0; z < n; ++z) {
          const double s = p_sharp_hat[z];
          if (s > left && s < right) prices[z] = s;
          else if (s <= left) prices[z] = std::max(dom.lo, left);
          else prices[z] = std::min(dom.hi, right);
        }
        return true;
      });
  result.xi = xi;
  return result;
}

CheckpointResult explore_constrained_discrepancy(Environment& env,
                                                 std::span<const double> p_sharp_hat,
                                                 const DiscrepancyFunction& f, double lambda,
                                                 const ExplorationSchedule& schedule) {
  if (env.groups() != 2 || p_sharp_hat.size() != 2)
    throw ConfigError("explore_constrained_discrepancy: needs exactly 2 groups");
  const std::int64_t T = env.horizon();
  const auto& dom = env.domain();
  const double xi =
      std::max(std::abs(f(p_sharp_hat[0], p_sharp_hat[1])) - f.lipschitz_bound() * schedule.slack(T),
               0.0);
  const double target = lambda * xi;
  const std::size_t low = lower_group(p_sharp_hat);
  const auto grid = checkpoint_grid(dom, schedule.checkpoints(T, dom));
  auto result = run_checkpoints(env, grid, schedule.checkpoint_count(T, 2, false),
                                [&](std::size_t j, std::vector<double>& prices) {
                                  auto partner = f.inverse(grid[j], target);
                                  if (!partner) return false;
                                  prices[low] = grid[j];
                                  prices[1 - low] = std::min(dom.hi, *partner);
                                  return true;
                                });
  result.xi = xi;
  return result;
}

CheckpointResult explore_constrained_general(Environment& env,
                                             std::span<const double> p_sharp_hat,
                                             const FairnessMeasure& measure, double lambda,
                                             double gamma, const ExplorationSchedule& schedule,
                                             bool multi_group_log) {
  const std::size_t n = env.groups();
  if (n > 3) throw ConfigError("explore_constrained_general: J^N search is limited to N <= 3");
  if (p_sharp_hat.size() != n) throw ConfigError("explore_constrained_general: one estimate per group");
  const std::int64_t T = env.horizon();
  const auto& dom = env.domain();
  const auto& inst = env.instance();
  const auto grid = checkpoint_grid(dom, schedule.checkpoints(T, dom));
  const std::size_t J = grid.size();
  const std::int64_t count = schedule.checkpoint_count(T, n, multi_group_log);
  const double cost = env.cost();
  const std::int64_t start = env.elapsed();

  CheckpointResult result;
  // Per checkpoint and group: empirical revenue and mean observed measure.
  std::vector<std::vector<double>> rev(n), meas(n);
  std::vector<double> d_sum(n), m_sum(n);
  for (std::size_t j = 0; j < J; ++j) {
    std::fill(d_sum.begin(), d_sum.end(), 0.0);
    std::fill(m_sum.begin(), m_sum.end(), 0.0);
    bool complete = true;
    try {
      for (std::int64_t k = 0; k < count; ++k) {
        auto d = env.post_uniform(grid[j]);
        for (std::size_t i = 0; i < n; ++i) {
          d_sum[i] += d[i];
          m_sum[i] += measure.observe(inst.curves[i], grid[j], d[i]);
        }
      }
    } catch (const BudgetExhausted&) {
      complete = false;
    }
    if (!complete) {
      result.exhausted = true;
      break;
    }
    ++result.completed;
    for (std::size_t i = 0; i < n; ++i) {
      rev[i].push_back((grid[j] - cost) * d_sum[i] / static_cast<double>(count));
      meas[i].push_back(m_sum[i] / static_cast<double>(count));
    }
  }
  result.periods = env.elapsed() - start;
  const auto done = static_cast<std::size_t>(result.completed);
  if (done == 0) {
    result.degenerate = true;
    result.prices.assign(n, grid.front());
    return result;
  }

  // Nearest completed checkpoint to each estimate; ties round down.
  std::vector<std::size_t> anchor_idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < done; ++j) {
      if (std::abs(grid[j] - p_sharp_hat[i]) < std::abs(grid[best] - p_sharp_hat[i])) best = j;
    }
    anchor_idx[i] = best;
  }
  double anchor_gap = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      anchor_gap = std::max(anchor_gap, std::abs(meas[a][anchor_idx[a]] - meas[b][anchor_idx[b]]));
  const double allowed = lambda * anchor_gap;

  std::vector<std::size_t> tuple(n, 0), best_tuple;
  double best = -INFINITY;
  while (true) {
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i) g += rev[i][tuple[i]];
    double penalty = 0.0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        penalty += std::max(std::abs(meas[a][tuple[a]] - meas[b][tuple[b]]) - allowed, 0.0);
    g -= gamma * penalty;
    if (g > best) {
      best = g;
      best_tuple = tuple;
    }
    std::size_t pos = n;
    while (pos > 0) {
      --pos;
      if (++tuple[pos] < done) break;
      tuple[pos] = 0;
      if (pos == 0) {
        pos = n;  // sentinel: wrapped around
        break;
      }
    }
    if (pos == n) break;
  }
  result.prices.resize(n);
  std::size_t flat = 0;
  for (std::size_t i = 0; i < n; ++i) {
    result.prices[i] = grid[best_tuple[i]];
    flat = flat * J + best_tuple[i];
  }
  result.best_index = static_cast<int>(flat);
  return result;
}

std::string_view policy_name(PolicyId id) {
  switch (id) {
    case PolicyId::FdpDl:
      return "fdp-dl";
    case PolicyId::FdpGfm:
      return "fdp-gfm";
    case PolicyId::FdpMulti:
      return "fdp-multi";
    case PolicyId::FdpGfmMulti:
      return "fdp-gfm-multi";
    case PolicyId::FdpDiscrepancy:
      return "fdp-discrepancy";
    case PolicyId::BaselineTrisect:
      return "baseline-trisect";
    case PolicyId::BaselineEtc:
      return "baseline-etc";
    case PolicyId::OracleReplay:
      return "oracle-replay";
    case PolicyId::SharpReplay:
      return "sharp-replay";
  }
  return "?";
}

std::vector<PolicyId> all_policies() {
  return {PolicyId::FdpDl,           PolicyId::FdpGfm,      PolicyId::FdpMulti,
          PolicyId::FdpGfmMulti,     PolicyId::FdpDiscrepancy, PolicyId::BaselineTrisect,
          PolicyId::BaselineEtc,     PolicyId::OracleReplay, PolicyId::SharpReplay};
}

PolicyId parse_policy(std::string_view name) {
  for (auto id : all_policies()) {
    if (policy_name(id) == name) return id;
  }
  throw ConfigError("policy: unknown name '" + std::string(name) + "'");
}

bool is_soft_policy(PolicyId id) { return id == PolicyId::FdpGfm || id == PolicyId::FdpGfmMulti; }
bool is_baseline(PolicyId id) {
  return id == PolicyId::BaselineTrisect || id == PolicyId::BaselineEtc;
}
bool is_diagnostic(PolicyId id) {
  return id == PolicyId::OracleReplay || id == PolicyId::SharpReplay;
}

std::int64_t commit_prices(Environment& env, std::span<const double> prices) {
  env.set_stage(Stage::III);
  std::int64_t used = 0;
  while (env.remaining() > 0) {
    env.post(prices);
    ++used;
  }
  return used;
}

namespace {

// Stage I for every group in index order; false when the horizon ran out.
bool stage_one(Environment& env, const ExplorationSchedule& schedule, bool multi_group_log,
               PolicyOutcome& out) {
  env.set_stage(Stage::I);
  const std::int64_t start = env.elapsed();
  bool ok = true;
  for (std::size_t z = 0; z < env.groups(); ++z) {
    auto r = explore_unconstrained(env, z, schedule, multi_group_log);
    out.p_sharp_hat.push_back(r.estimate);
    if (r.exhausted) {
      ok = false;
      break;
    }
  }
  out.stage1_periods = env.elapsed() - start;
  return ok;
}

void finish(Environment& env, PolicyOutcome& out) {
  out.stage2_periods = out.stage2.periods;
  if (out.stage2.exhausted || env.remaining() == 0) return;
  out.committed = out.stage2.prices;
  out.stage3_periods = commit_prices(env, out.committed);
}

}  // namespace

PolicyOutcome run_fdp_dl(Environment& env, double lambda, const ExplorationSchedule& schedule,
                         bool multi_group_log) {
  PolicyOutcome out;
  if (!stage_one(env, schedule, multi_group_log, out)) return out;
  env.set_stage(Stage::II);
  if (env.groups() == 2 && !multi_group_log) {
    out.stage2 = explore_constrained_price(env, out.p_sharp_hat, lambda, schedule);
  } else {
    out.stage2 = explore_constrained_multi(env, out.p_sharp_hat, lambda, schedule, multi_group_log);
  }
  finish(env, out);
  return out;
}

PolicyOutcome run_fdp_gfm(Environment& env, const FairnessMeasure& measure, double lambda,
                          double gamma, const ExplorationSchedule& schedule, bool multi_group_log) {
  PolicyOutcome out;
  if (!stage_one(env, schedule, multi_group_log, out)) return out;
  env.set_stage(Stage::II);
  out.stage2 = explore_constrained_general(env, out.p_sharp_hat, measure, lambda, gamma, schedule,
                                           multi_group_log);
  finish(env, out);
  return out;
}

PolicyOutcome run_fdp_discrepancy(Environment& env, const DiscrepancyFunction& f, double lambda,
                                  const ExplorationSchedule& schedule) {
  PolicyOutcome out;
  if (!stage_one(env, schedule, false, out)) return out;
  env.set_stage(Stage::II);
  out.stage2 = explore_constrained_discrepancy(env, out.p_sharp_hat, f, lambda, schedule);
  finish(env, out);
  return out;
}

PolicyOutcome run_baseline(Environment& env, BaselineVariant variant,
                           const ExplorationSchedule& schedule) {
  PolicyOutcome out;
  env.set_stage(Stage::I);
  const std::int64_t T = env.horizon();
  const auto& dom = env.domain();
  const double cost = env.cost();
  std::vector<double> prices(env.groups());
  auto total_revenue = [&](const Block& b, double price) {
    double sum = 0.0;
    for (double d : b.demand_sum) sum += d;
    return (price - cost) * sum / static_cast<double>(b.count);
  };

  double commit = dom.lo;
  bool have_commit = false;
  if (variant == BaselineVariant::TrisectionSamePrice) {
    double lo = dom.lo, hi = dom.hi;
    const double logT = std::log(static_cast<double>(T));
    for (int r = 1;; ++r) {
      const std::int64_t n = ceil_count(schedule.c_baseline * logT * std::pow(1.5, 4.0 * r));
      if (2 * n > env.remaining()) break;
      const double m1 = (2.0 * lo + hi) / 3.0;
      const double m2 = (lo + 2.0 * hi) / 3.0;
      std::fill(prices.begin(), prices.end(), m1);
      const Block b1 = sample_block(env, prices, n);
      std::fill(prices.begin(), prices.end(), m2);
      const Block b2 = sample_block(env, prices, n);
      if (total_revenue(b1, m1) > total_revenue(b2, m2)) hi = m2;
      else lo = m1;
    }
    commit = 0.5 * (lo + hi);
    have_commit = true;
  } else {
    const auto J = ceil_count(std::cbrt(static_cast<double>(T)));
    const auto n = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::pow(static_cast<double>(T), 2.0 / 3.0) /
                                     static_cast<double>(J)));
    const auto grid = checkpoint_grid(dom, J);
    double best = -INFINITY;
    for (double price : grid) {
      std::fill(prices.begin(), prices.end(), price);
      const Block b = sample_block(env, prices, n);
      if (!b.complete) break;
      const double value = total_revenue(b, price);
      if (value > best) {
        best = value;
        commit = price;
        have_commit = true;
      }
    }
  }
  out.stage1_periods = env.elapsed();
  if (have_commit && env.remaining() > 0) {
    out.committed.assign(env.groups(), commit);
    out.stage3_periods = commit_prices(env, out.committed);
  }
  return out;
}

PolicyOutcome run_policy(PolicyId id, Environment& env, const FairnessSpec& spec,
                         const ExplorationSchedule& schedule, const ClairvoyantSolution* oracle) {
  switch (id) {
    case PolicyId::FdpDl:
      return run_fdp_dl(env, spec.lambda, schedule, false);
    case PolicyId::FdpMulti:
      return run_fdp_dl(env, spec.lambda, schedule, true);
    case PolicyId::FdpGfm:
      return run_fdp_gfm(env, spec.measure, spec.lambda, spec.gamma, schedule, false);
    case PolicyId::FdpGfmMulti:
      return run_fdp_gfm(env, spec.measure, spec.lambda, spec.gamma, schedule, true);
    case PolicyId::FdpDiscrepancy:
      return run_fdp_discrepancy(env, spec.discrepancy, spec.lambda, schedule);
    case PolicyId::BaselineTrisect:
      return run_baseline(env, BaselineVariant::TrisectionSamePrice, schedule);
    case PolicyId::BaselineEtc:
      return run_baseline(env, BaselineVariant::EtcSamePrice, schedule);
    case PolicyId::OracleReplay:
    case PolicyId::SharpReplay: {
      if (!oracle) throw ConfigError("diagnostic policy needs a clairvoyant solution");
      PolicyOutcome out;
      out.committed = id == PolicyId::OracleReplay ? oracle->p_star : oracle->p_sharp;
      out.stage3_periods = commit_prices(env, out.committed);
      return out;
    }
  }
  throw ConfigError("policy: unhandled id");
}

}  // namespace fairprice
