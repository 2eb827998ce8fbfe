#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "fairprice/catalog.hpp"
#include "fairprice/policies.hpp"
#include "fairprice/simulator.hpp"

namespace fairprice {

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Trial seed: splitmix64(splitmix64(splitmix64(base) ^ cell) ^ trial).
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t cell, std::uint64_t trial);

/// 64-bit FNV-1a of the canonical cell key "policy=<name>;lambda=<%.17g>;T=<T>".
std::uint64_t cell_id(PolicyId policy, double lambda, std::int64_t horizon);

struct SweepConfig {
  std::string instance = "exp-paper";
  std::vector<PolicyId> policies;
  std::vector<double> lambdas;
  std::vector<std::int64_t> horizons;
  int trials = 1;
  std::uint64_t base_seed = 1;
  ExplorationSchedule schedule;
  FairnessMeasure::Kind measure = FairnessMeasure::Kind::Price;
  std::optional<ConstraintMode> mode;  // unset: soft iff any soft policy is listed
  double gamma = 1.0;
  std::string output_dir = "sweep_out";
  unsigned workers = 0;  // 0: hardware concurrency

  ConstraintMode resolved_mode() const;
  /// All violations at once; empty when valid.
  std::vector<std::string> violations() const;
  void validate() const;
  std::size_t trial_count() const;
};

struct CellResult {
  PolicyId policy = PolicyId::FdpDl;
  double lambda = 0.0;
  std::int64_t horizon = 0;
  int trials = 0;
  double mean_regret = 0.0;
  double std_regret = 0.0;
  double stderr_regret = 0.0;
  double mean_penalized_regret = 0.0;
  double std_penalized_regret = 0.0;
  double violation_trial_frac = 0.0;
  double violation_period_frac = 0.0;
  std::uint64_t cell = 0;
  std::vector<std::uint64_t> seeds;
  std::string error;  // non-empty when a trial aborted the cell
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  // (ln T, ln mean regret)
  std::vector<double> dropped;                    // T values with non-positive regret
};

/// OLS on (ln T, ln regret) from (T, regret) pairs. Non-positive regrets are
/// dropped and reported; fewer than 3 remaining points raise ConfigError.
SlopeFit fit_slope(std::span<const std::pair<double, double>> samples);

struct SlopeRow {
  PolicyId policy = PolicyId::FdpDl;
  double lambda = 0.0;
  bool penalized = false;
  std::optional<SlopeFit> fit;
  std::string error;
};

struct SweepResult {
  SweepConfig config;
  std::vector<ClairvoyantSolution> oracles;  // one per lambda
  std::vector<CellResult> cells;             // policy-major, then lambda, then T
  std::vector<SlopeRow> slopes;              // one per (policy, lambda)

  const CellResult& cell(PolicyId policy, double lambda, std::int64_t horizon) const;
  const SlopeRow& slope(PolicyId policy, double lambda) const;
};

/// Runs every (policy, lambda, T) cell for `trials` seeds. Trials run on a
/// worker pool; aggregation is in trial-index order, so results do not depend
/// on the worker count.
SweepResult run_sweep(const SweepConfig& config, const InstanceCatalog& catalog = {});

struct TrialStats {
  double regret = 0.0;
  double penalized_regret = 0.0;
  std::int64_t violations = 0;
  std::int64_t horizon = 0;
};

/// Mean/std/stderr over trials in index order.
CellResult aggregate_cell(PolicyId policy, double lambda, std::int64_t horizon,
                          std::span<const TrialStats> trials);

void write_results_csv(std::ostream& out, const SweepResult& result);
void write_slopes_csv(std::ostream& out, const SweepResult& result);
/// Resolved config, oracle solutions and per-cell seeds. The timestamp is the
/// only field that varies between identical runs.
nlohmann::json manifest_json(const SweepResult& result, const std::string& timestamp);

/// Named presets: desk-scale-fig1, desk-scale-fig2, desk-scale-linear,
/// desk-scale-invprop, paper-scale.
SweepConfig sweep_preset(std::string_view name);
std::vector<std::string> sweep_preset_names();
/// Schedule multipliers used by the desk-scale presets and acceptance runs.
ExplorationSchedule desk_schedule();

}  // namespace fairprice
