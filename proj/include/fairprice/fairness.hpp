#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "fairprice/demand.hpp"

namespace fairprice {

/// Quantity whose pairwise gap across groups is constrained.
class FairnessMeasure {
 public:
  enum class Kind { Price, Demand, Custom };
  using TrueFn = std::function<double(double price, const DemandCurve&)>;
  using ObserveFn = std::function<double(double price, double realized_demand)>;

  static FairnessMeasure price(double observation_bound = 1.0);
  static FairnessMeasure demand(double observation_bound = 1.0);
  static FairnessMeasure custom(std::string name, TrueFn truth, ObserveFn observe,
                                double observation_bound);
  /// Price or demand measure with a bound wide enough for the instance's prices.
  static FairnessMeasure for_instance(Kind kind, const MarketInstance& instance);

  Kind kind() const { return kind_; }
  double observation_bound() const { return bound_; }
  std::string name() const;

  /// M_i(p) evaluated on the true curve.
  double true_value(const DemandCurve& curve, double p) const;
  /// Noisy observation revealed after a period; throws DomainError when the
  /// value leaves [0, observation_bound].
  double observe(const DemandCurve& curve, double p, double realized_demand) const;

 private:
  FairnessMeasure(Kind kind, double bound) : kind_(kind), bound_(bound) {}
  Kind kind_;
  double bound_;
  std::string name_;
  TrueFn truth_;
  ObserveFn observe_;
};

double observe_measure(const FairnessMeasure& measure, const DemandCurve& curve, double p,
                       double realized_demand);

/// f(x, y) replacing the plain difference in the fairness constraint.
/// |f| is assumed symmetric so that relabeling groups is harmless.
class DiscrepancyFunction {
 public:
  enum class Kind { Difference, LogRatio, Custom };

  static DiscrepancyFunction difference();
  static DiscrepancyFunction log_ratio(double epsilon, double lipschitz_bound = 1.0);
  static DiscrepancyFunction custom(std::string name, std::function<double(double, double)> fn,
                                    double lipschitz_bound);

  Kind kind() const { return kind_; }
  double epsilon() const { return epsilon_; }
  double lipschitz_bound() const { return lipschitz_; }
  std::string name() const;

  double operator()(double x, double y) const;

  /// For target > 0, returns y > x with |f(x, y)| == target (within 1e-9), or
  /// nullopt when no such y exists below `search_limit`. target == 0 gives x.
  std::optional<double> inverse(double x, double target, double search_limit = 1e6) const;

 private:
  DiscrepancyFunction(Kind kind, double epsilon, double lipschitz)
      : kind_(kind), epsilon_(epsilon), lipschitz_(lipschitz) {}
  Kind kind_;
  double epsilon_;
  double lipschitz_;
  std::string name_;
  std::function<double(double, double)> fn_;
};

enum class ConstraintMode { Hard, Soft };

std::string to_string(ConstraintMode mode);
std::string to_string(FairnessMeasure::Kind kind);

/// Slack used by every hard-constraint comparison.
inline constexpr double kFairnessSlack = 1e-9;

struct FairnessSpec {
  FairnessMeasure measure = FairnessMeasure::price();
  double lambda = 1.0;
  ConstraintMode mode = ConstraintMode::Hard;
  double gamma = 1.0;
  DiscrepancyFunction discrepancy = DiscrepancyFunction::difference();

  void validate() const;
  std::string describe() const;

  /// |f(a, b)| between two measure values.
  double pair_gap(double a, double b) const { return std::abs(discrepancy(a, b)); }
  /// Largest pairwise |f| over true measure values at the given prices.
  double max_gap(const MarketInstance& instance, std::span<const double> prices) const;
};

}  // namespace fairprice
