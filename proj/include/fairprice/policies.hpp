#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairprice/environment.hpp"
#include "fairprice/fairness.hpp"
#include "fairprice/oracle.hpp"

namespace fairprice {

/// Sample-count schedule for the exploration stages.
///
/// The theoretical counts are
///   Stage I : c_trisect * 25 K^4 pmax^2 / C^2 * T^(4/5) * ln T   per trisection point
///   Stage II: c_checkpoint * 6 * T^(2/5) * ln T                    per checkpoint
/// with ln(N T) in place of ln T for the multi-group policies. Multipliers
/// rescale the counts without changing their shape in T.
struct ExplorationSchedule {
  double c_trisect = 1.0;
  double c_checkpoint = 1.0;
  std::optional<double> trisect_stop_width;  // default 4 T^(-1/5)
  std::optional<double> xi_slack;            // default 8 T^(-1/5)
  double checkpoint_count_scale = 1.0;       // J = ceil(scale * (pmax - pmin) * T^(1/5))
  double K = 1.0;
  double C = 1.0;
  double K_prime = 1.0;
  double M_bar = 1.0;
  double c_baseline = 1.0;  // multiplier for the same-price trisection baseline

  void validate() const;
  std::string describe() const;

  std::int64_t trisect_count(std::int64_t T, double pmax, std::size_t groups,
                             bool multi_group_log) const;
  std::int64_t checkpoint_count(std::int64_t T, std::size_t groups, bool multi_group_log) const;
  std::int64_t checkpoints(std::int64_t T, const PriceInterval& domain) const;
  double stop_width(std::int64_t T) const;
  double slack(std::int64_t T) const;
};

/// Checkpoint prices l_j = pmin + (j / J)(pmax - pmin), j = 1..J.
std::vector<double> checkpoint_grid(const PriceInterval& domain, std::int64_t J);

struct TrisectionResult {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int iterations = 0;  // completed iterations
  std::int64_t periods = 0;
  bool exhausted = false;
  std::vector<double> widths;  // interval width before each iteration and after the last
};

struct CheckpointResult {
  std::vector<double> prices;
  int best_index = -1;  // 0-based checkpoint (or flattened tuple) index
  int completed = 0;
  int skipped = 0;
  double xi = 0.0;
  bool degenerate = false;
  bool exhausted = false;
  std::int64_t periods = 0;
};

/// Stage I trisection for group z. Every price is offered to all groups.
TrisectionResult explore_unconstrained(Environment& env, std::size_t z,
                                       const ExplorationSchedule& schedule,
                                       bool multi_group_log = false);

/// Stage II for two groups under hard price fairness: checkpoints
/// (l_j - lambda xi / 2, l_j + lambda xi / 2), lower price to the group with
/// the smaller estimate.
CheckpointResult explore_constrained_price(Environment& env, std::span<const double> p_sharp_hat,
                                           double lambda, const ExplorationSchedule& schedule);

/// Stage II for general measures under the soft constraint. Works for N <= 3
/// (J^N candidate tuples); N == 2 is the two-group variant.
CheckpointResult explore_constrained_general(Environment& env,
                                             std::span<const double> p_sharp_hat,
                                             const FairnessMeasure& measure, double lambda,
                                             double gamma, const ExplorationSchedule& schedule,
                                             bool multi_group_log = false);

/// Stage II for N groups under hard price fairness: each estimate clamped
/// into the checkpoint window.
CheckpointResult explore_constrained_multi(Environment& env, std::span<const double> p_sharp_hat,
                                           double lambda, const ExplorationSchedule& schedule,
                                           bool multi_group_log = true);

/// Stage II with a general price discrepancy: (l_j, min(pmax, f^-1(l_j; lambda xi))).
CheckpointResult explore_constrained_discrepancy(Environment& env,
                                                 std::span<const double> p_sharp_hat,
                                                 const DiscrepancyFunction& f, double lambda,
                                                 const ExplorationSchedule& schedule);

enum class PolicyId {
  FdpDl,
  FdpGfm,
  FdpMulti,
  FdpGfmMulti,
  FdpDiscrepancy,
  BaselineTrisect,
  BaselineEtc,
  OracleReplay,  // diagnostic: posts p* every period
  SharpReplay,   // diagnostic: posts p# every period
};

std::string_view policy_name(PolicyId id);
/// Throws ConfigError for unknown names.
PolicyId parse_policy(std::string_view name);
std::vector<PolicyId> all_policies();
bool is_soft_policy(PolicyId id);
bool is_baseline(PolicyId id);
bool is_diagnostic(PolicyId id);

struct PolicyOutcome {
  std::vector<double> p_sharp_hat;
  std::vector<double> committed;  // empty if the horizon ended before Stage III
  CheckpointResult stage2;
  std::int64_t stage1_periods = 0;
  std::int64_t stage2_periods = 0;
  std::int64_t stage3_periods = 0;
};

/// Posts `prices` until the horizon ends; returns the number of periods used.
std::int64_t commit_prices(Environment& env, std::span<const double> prices);

PolicyOutcome run_fdp_dl(Environment& env, double lambda, const ExplorationSchedule& schedule,
                         bool multi_group_log = false);
PolicyOutcome run_fdp_gfm(Environment& env, const FairnessMeasure& measure, double lambda,
                          double gamma, const ExplorationSchedule& schedule,
                          bool multi_group_log = false);
PolicyOutcome run_fdp_discrepancy(Environment& env, const DiscrepancyFunction& f, double lambda,
                                  const ExplorationSchedule& schedule);

enum class BaselineVariant { TrisectionSamePrice, EtcSamePrice };
PolicyOutcome run_baseline(Environment& env, BaselineVariant variant,
                           const ExplorationSchedule& schedule);

/// Dispatches by id. Diagnostic policies need `oracle`.
PolicyOutcome run_policy(PolicyId id, Environment& env, const FairnessSpec& spec,
                         const ExplorationSchedule& schedule,
                         const ClairvoyantSolution* oracle = nullptr);

}  // namespace fairprice
