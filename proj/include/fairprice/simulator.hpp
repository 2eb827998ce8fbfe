#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "fairprice/oracle.hpp"
#include "fairprice/policies.hpp"

namespace fairprice {

struct PeriodRecord {
  std::int64_t period = 0;  // 1-based
  Stage stage = Stage::I;
  std::vector<double> prices;
  std::vector<double> demands;
  double regret_inc = 0.0;
  double penalty_inc = 0.0;
  bool violation = false;

  friend bool operator==(const PeriodRecord&, const PeriodRecord&) = default;
};

struct TraceSummary {
  double regret = 0.0;            // Reg_T, expected-revenue accounting
  double penalty = 0.0;           // sum of penalty increments
  double penalized_regret = 0.0;  // Reg_T^soft
  double realized_revenue = 0.0;
  double realized_regret = 0.0;   // T * revenue_star - realized revenue
  std::int64_t violations = 0;    // periods with a hard-constraint violation
  std::vector<double> committed;
  std::vector<double> p_sharp_hat;
  std::array<std::int64_t, 3> stage_periods{0, 0, 0};
  bool degenerate = false;

  friend bool operator==(const TraceSummary&, const TraceSummary&) = default;
};

struct TrialTrace {
  std::vector<PeriodRecord> records;  // every period with full_trace, else every 1000th
  TraceSummary summary;
  std::uint64_t seed = 0;
  std::int64_t horizon = 0;
  std::size_t groups = 0;
  bool full = false;
  std::string policy;
  std::string fingerprint;

  friend bool operator==(const TrialTrace&, const TrialTrace&) = default;
};

struct TrialOptions {
  bool full_trace = false;
  std::int64_t sample_every = 1000;
  OracleOptions oracle;
};

/// Throws ConfigError when the policy cannot run under `spec`: hard
/// policies reject soft specs and vice versa (baselines accept both), price
/// policies require the price measure, and J^N search is limited to N <= 3.
void check_compatibility(PolicyId policy, const FairnessSpec& spec,
                         const MarketInstance& instance);

/// Fingerprint of everything that determines a trace except the seed.
std::string config_fingerprint(const MarketInstance& instance, const FairnessSpec& spec,
                               PolicyId policy, const ExplorationSchedule& schedule,
                               std::int64_t horizon);

TrialTrace run_trial(const MarketInstance& instance, const FairnessSpec& spec, PolicyId policy,
                     const ExplorationSchedule& schedule, std::int64_t horizon,
                     std::uint64_t seed, const TrialOptions& options = {});

/// Same, with a precomputed clairvoyant solution for (instance, spec).
TrialTrace run_trial(const MarketInstance& instance, const FairnessSpec& spec, PolicyId policy,
                     const ExplorationSchedule& schedule, std::int64_t horizon,
                     std::uint64_t seed, const ClairvoyantSolution& oracle,
                     const TrialOptions& options = {});

/// Per-period accounting against a clairvoyant solution. Usable as a sink
/// for any Environment, including hand-written reference policies.
class TrialRecorder final : public PeriodSink {
 public:
  TrialRecorder(const MarketInstance& instance, const FairnessSpec& spec,
                const ClairvoyantSolution& oracle, bool full_trace,
                std::int64_t sample_every = 1000);

  void on_period(Stage stage, std::span<const double> prices,
                 std::span<const double> demands) override;

  const std::vector<PeriodRecord>& records() const { return records_; }
  std::vector<PeriodRecord> take_records() { return std::move(records_); }
  const TraceSummary& summary() const { return summary_; }
  TraceSummary& summary() { return summary_; }

 private:
  void evaluate(std::span<const double> prices);

  MarketInstance instance_;
  FairnessSpec spec_;
  ClairvoyantSolution oracle_;
  bool full_;
  std::int64_t sample_every_;
  std::int64_t period_ = 0;
  double allowed_gap_;
  std::vector<PeriodRecord> records_;
  TraceSummary summary_;
  std::vector<double> last_prices_;
  double last_regret_ = 0.0;
  double last_penalty_ = 0.0;
  bool last_violation_ = false;
};

struct ViolationRate {
  double trial_fraction = 0.0;   // trials with at least one violating period
  double period_fraction = 0.0;  // violating periods over all periods
};

ViolationRate violation_rate(std::span<const TrialTrace> traces);

/// CSV: period,stage,p_1..p_N,D_1..D_N,regret_inc,penalty_inc,violation
void write_trace_csv(std::ostream& out, const TrialTrace& trace);
nlohmann::json summary_json(const TrialTrace& trace);
nlohmann::json solution_json(const ClairvoyantSolution& solution);

}  // namespace fairprice
