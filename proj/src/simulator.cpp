#include "fairprice/simulator.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace fairprice {

namespace {

std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void check_compatibility(PolicyId policy, const FairnessSpec& spec,
                         const MarketInstance& instance) {
  spec.validate();
  const auto name = std::string(policy_name(policy));
  const bool price = spec.measure.kind() == FairnessMeasure::Kind::Price;
  const bool difference = spec.discrepancy.kind() == DiscrepancyFunction::Kind::Difference;
  const std::size_t n = instance.groups();

  if (!is_baseline(policy) && !is_diagnostic(policy)) {
    if (is_soft_policy(policy) && spec.mode != ConstraintMode::Soft)
      throw ConfigError("mode: policy " + name + " needs the soft constraint");
    if (!is_soft_policy(policy) && spec.mode != ConstraintMode::Hard)
      throw ConfigError("mode: policy " + name + " needs the hard constraint");
  }
  switch (policy) {
    case PolicyId::FdpDl:
    case PolicyId::FdpMulti:
      if (!price) throw ConfigError("measure: policy " + name + " needs the price measure");
      if (!difference)
        throw ConfigError("discrepancy: policy " + name + " uses plain price differences");
      break;
    case PolicyId::FdpDiscrepancy:
      if (!price) throw ConfigError("measure: policy " + name + " needs the price measure");
      if (n != 2) throw ConfigError("instance: policy " + name + " needs exactly 2 groups");
      break;
    case PolicyId::FdpGfm:
    case PolicyId::FdpGfmMulti:
      if (n > 3) throw ConfigError("instance: policy " + name + " searches J^N tuples, N <= 3");
      if (!difference)
        throw ConfigError("discrepancy: policy " + name + " uses plain measure differences");
      break;
    default:
      break;
  }
  const bool structural = price && difference && instance.regular();
  if (!structural && n > 3)
    throw ConfigError("instance: the clairvoyant oracle for this spec is limited to N <= 3");
}

std::string config_fingerprint(const MarketInstance& instance, const FairnessSpec& spec,
                               PolicyId policy, const ExplorationSchedule& schedule,
                               std::int64_t horizon) {
  std::ostringstream out;
  out << "instance=" << instance.name << "{";
  for (const auto& c : instance.curves) out << c.describe() << ";";
  out << "noise=" << instance.noise.describe() << "}|" << spec.describe()
      << "|policy=" << policy_name(policy) << "|" << schedule.describe() << "|T=" << horizon;
  return out.str();
}

TrialRecorder::TrialRecorder(const MarketInstance& instance, const FairnessSpec& spec,
                             const ClairvoyantSolution& oracle, bool full_trace,
                             std::int64_t sample_every)
    : instance_(instance),
      spec_(spec),
      oracle_(oracle),
      full_(full_trace),
      sample_every_(sample_every < 1 ? 1 : sample_every),
      allowed_gap_(spec.lambda * oracle.gap_sharp) {}

void TrialRecorder::evaluate(std::span<const double> prices) {
  const std::size_t n = prices.size();
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = spec_.measure.true_value(instance_.curves[i], prices[i]);
  double excess_sum = 0.0;
  double worst = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double excess = spec_.pair_gap(m[a], m[b]) - allowed_gap_;
      worst = std::max(worst, excess);
      if (excess > kFairnessSlack) excess_sum += excess;
    }
  }
  last_prices_.assign(prices.begin(), prices.end());
  last_regret_ = oracle_.revenue_star - instance_.total_revenue(prices);
  last_penalty_ = spec_.gamma * excess_sum;
  last_violation_ = worst > kFairnessSlack;
}

void TrialRecorder::on_period(Stage stage, std::span<const double> prices,
                              std::span<const double> demands) {
  ++period_;
  if (!std::equal(prices.begin(), prices.end(), last_prices_.begin(), last_prices_.end()))
    evaluate(prices);
  summary_.regret += last_regret_;
  summary_.penalty += last_penalty_;
  summary_.penalized_regret = summary_.regret + summary_.penalty;
  const double cost = instance_.cost();
  for (std::size_t i = 0; i < prices.size(); ++i)
    summary_.realized_revenue += (prices[i] - cost) * demands[i];
  summary_.realized_regret =
      static_cast<double>(period_) * oracle_.revenue_star - summary_.realized_revenue;
  if (last_violation_) ++summary_.violations;
  ++summary_.stage_periods[static_cast<std::size_t>(stage) - 1];
  if (full_ || period_ % sample_every_ == 0) {
    records_.push_back(PeriodRecord{period_, stage, std::vector<double>(prices.begin(), prices.end()),
                                    std::vector<double>(demands.begin(), demands.end()),
                                    last_regret_, last_penalty_, last_violation_});
  }
}

TrialTrace run_trial(const MarketInstance& instance, const FairnessSpec& spec, PolicyId policy,
                     const ExplorationSchedule& schedule, std::int64_t horizon,
                     std::uint64_t seed, const TrialOptions& options) {
  check_compatibility(policy, spec, instance);
  const auto oracle = solve_clairvoyant(instance, spec, options.oracle);
  return run_trial(instance, spec, policy, schedule, horizon, seed, oracle, options);
}

TrialTrace run_trial(const MarketInstance& instance, const FairnessSpec& spec, PolicyId policy,
                     const ExplorationSchedule& schedule, std::int64_t horizon,
                     std::uint64_t seed, const ClairvoyantSolution& oracle,
                     const TrialOptions& options) {
  check_compatibility(policy, spec, instance);
  schedule.validate();
  if (horizon < 1) throw ConfigError("T: horizon must be >= 1");
  TrialRecorder recorder(instance, spec, oracle, options.full_trace, options.sample_every);
  Environment env(instance, horizon, seed, &recorder);
  const auto outcome = run_policy(policy, env, spec, schedule, &oracle);

  TrialTrace trace;
  trace.summary = recorder.summary();
  trace.summary.committed = outcome.committed;
  trace.summary.p_sharp_hat = outcome.p_sharp_hat;
  trace.summary.degenerate = outcome.stage2.degenerate;
  trace.records = recorder.take_records();
  trace.seed = seed;
  trace.horizon = horizon;
  trace.groups = instance.groups();
  trace.full = options.full_trace;
  trace.policy = std::string(policy_name(policy));
  trace.fingerprint = config_fingerprint(instance, spec, policy, schedule, horizon);
  return trace;
}

ViolationRate violation_rate(std::span<const TrialTrace> traces) {
  if (traces.empty()) throw ConfigError("violation_rate: needs at least one trace");
  std::size_t trials_hit = 0;
  std::int64_t periods = 0;
  std::int64_t violating = 0;
  for (const auto& t : traces) {
    if (t.summary.violations > 0) ++trials_hit;
    violating += t.summary.violations;
    periods += t.horizon;
  }
  return {static_cast<double>(trials_hit) / static_cast<double>(traces.size()),
          static_cast<double>(violating) / static_cast<double>(periods)};
}

void write_trace_csv(std::ostream& out, const TrialTrace& trace) {
  out << "period,stage";
  for (std::size_t i = 1; i <= trace.groups; ++i) out << ",p_" << i;
  for (std::size_t i = 1; i <= trace.groups; ++i) out << ",D_" << i;
  out << ",regret_inc,penalty_inc,violation\n";
  for (const auto& r : trace.records) {
    out << r.period << "," << to_string(r.stage);
    for (double p : r.prices) out << "," << fmt_double(p);
    for (double d : r.demands) out << "," << fmt_double(d);
    out << "," << fmt_double(r.regret_inc) << "," << fmt_double(r.penalty_inc) << ","
        << (r.violation ? 1 : 0) << "\n";
  }
}

nlohmann::json summary_json(const TrialTrace& trace) {
  const auto& s = trace.summary;
  return nlohmann::json{
      {"policy", trace.policy},
      {"seed", trace.seed},
      {"T", trace.horizon},
      {"groups", trace.groups},
      {"regret", s.regret},
      {"penalty", s.penalty},
      {"penalized_regret", s.penalized_regret},
      {"realized_revenue", s.realized_revenue},
      {"realized_regret", s.realized_regret},
      {"violations", s.violations},
      {"committed", s.committed},
      {"p_sharp_hat", s.p_sharp_hat},
      {"stage_periods", {{"I", s.stage_periods[0]}, {"II", s.stage_periods[1]}, {"III", s.stage_periods[2]}}},
      {"degenerate", s.degenerate},
      {"full_trace", trace.full},
      {"records", trace.records.size()},
      {"fingerprint", trace.fingerprint},
  };
}

nlohmann::json solution_json(const ClairvoyantSolution& solution) {
  return nlohmann::json{
      {"p_sharp", solution.p_sharp},         {"p_star", solution.p_star},
      {"revenue_sharp", solution.revenue_sharp}, {"revenue_star", solution.revenue_star},
      {"gap_sharp", solution.gap_sharp},     {"lambda", solution.lambda},
  };
}

}  // namespace fairprice
