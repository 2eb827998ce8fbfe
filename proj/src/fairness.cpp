#include "fairprice/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fairprice {

FairnessMeasure FairnessMeasure::price(double observation_bound) {
  if (!(observation_bound >= 1.0)) throw ConfigError("measure: observation_bound must be >= 1");
  return {Kind::Price, observation_bound};
}

FairnessMeasure FairnessMeasure::demand(double observation_bound) {
  if (!(observation_bound >= 1.0)) throw ConfigError("measure: observation_bound must be >= 1");
  return {Kind::Demand, observation_bound};
}

FairnessMeasure FairnessMeasure::custom(std::string name, TrueFn truth, ObserveFn observe,
                                        double observation_bound) {
  if (!(observation_bound >= 1.0)) throw ConfigError("measure: observation_bound must be >= 1");
  if (!truth || !observe) throw ConfigError("measure: custom measure needs both functions");
  FairnessMeasure m(Kind::Custom, observation_bound);
  m.name_ = std::move(name);
  m.truth_ = std::move(truth);
  m.observe_ = std::move(observe);
  return m;
}

FairnessMeasure FairnessMeasure::for_instance(Kind kind, const MarketInstance& instance) {
  switch (kind) {
    case Kind::Price:
      return price(std::max(1.0, instance.domain().hi));
    case Kind::Demand:
      return demand(1.0);
    case Kind::Custom:
      break;
  }
  throw ConfigError("measure: custom measures cannot be built from a kind alone");
}

std::string FairnessMeasure::name() const {
  switch (kind_) {
    case Kind::Price:
      return "price";
    case Kind::Demand:
      return "demand";
    case Kind::Custom:
      return "custom:" + name_;
  }
  return "?";
}

double FairnessMeasure::true_value(const DemandCurve& curve, double p) const {
  switch (kind_) {
    case Kind::Price:
      return p;
    case Kind::Demand:
      return curve.demand(p);
    case Kind::Custom:
      return truth_(p, curve);
  }
  return 0.0;
}

double FairnessMeasure::observe(const DemandCurve&, double p, double realized_demand) const {
  double value = 0.0;
  switch (kind_) {
    case Kind::Price:
      value = p;
      break;
    case Kind::Demand:
      value = realized_demand;
      break;
    case Kind::Custom:
      value = observe_(p, realized_demand);
      break;
  }
  if (!(value >= 0.0 && value <= bound_)) {
    std::ostringstream msg;
    msg << "measure " << name() << ": observation " << value << " outside [0, " << bound_
        << "]";
    throw DomainError(msg.str());
  }
  return value;
}

double observe_measure(const FairnessMeasure& measure, const DemandCurve& curve, double p,
                       double realized_demand) {
  return measure.observe(curve, p, realized_demand);
}

DiscrepancyFunction DiscrepancyFunction::difference() { return {Kind::Difference, 0.0, 1.0}; }

DiscrepancyFunction DiscrepancyFunction::log_ratio(double epsilon, double lipschitz_bound) {
  if (!(epsilon >= 0.0)) throw ConfigError("discrepancy: log_ratio epsilon must be >= 0");
  if (!(lipschitz_bound >= 1.0)) throw ConfigError("discrepancy: lipschitz_bound must be >= 1");
  return {Kind::LogRatio, epsilon, lipschitz_bound};
}

DiscrepancyFunction DiscrepancyFunction::custom(std::string name,
                                                std::function<double(double, double)> fn,
                                                double lipschitz_bound) {
  if (!(lipschitz_bound >= 1.0)) throw ConfigError("discrepancy: lipschitz_bound must be >= 1");
  if (!fn) throw ConfigError("discrepancy: custom function is empty");
  DiscrepancyFunction f(Kind::Custom, 0.0, lipschitz_bound);
  f.name_ = std::move(name);
  f.fn_ = std::move(fn);
  return f;
}

std::string DiscrepancyFunction::name() const {
  switch (kind_) {
    case Kind::Difference:
      return "difference";
    case Kind::LogRatio: {
      std::ostringstream out;
      out.precision(17);
      out << "log_ratio(" << epsilon_ << ")";
      return out.str();
    }
    case Kind::Custom:
      return "custom:" + name_;
  }
  return "?";
}

double DiscrepancyFunction::operator()(double x, double y) const {
  switch (kind_) {
    case Kind::Difference:
      return x - y;
    case Kind::LogRatio:
      return std::log((x + epsilon_) / (y + epsilon_));
    case Kind::Custom:
      return fn_(x, y);
  }
  return 0.0;
}

std::optional<double> DiscrepancyFunction::inverse(double x, double target,
                                                   double search_limit) const {
  if (!(target >= 0.0)) return std::nullopt;
  if (target == 0.0) return x;
  std::optional<double> y;
  switch (kind_) {
    case Kind::Difference:
      y = x + target;
      break;
    case Kind::LogRatio:
      // |ln((x + e) / (y + e))| = target with y > x.
      if (x + epsilon_ > 0.0) y = (x + epsilon_) * std::exp(target) - epsilon_;
      break;
    case Kind::Custom: {
      auto excess = [&](double v) { return std::abs((*this)(x, v)) - target; };
      double lo = x;
      double step = 1e-3 * std::max(1.0, std::abs(x));
      double hi = x + step;
      while (excess(hi) < 0.0) {
        lo = hi;
        step *= 2.0;
        hi = x + step;
        if (hi > search_limit) return std::nullopt;
      }
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) < 0.0 ? lo : hi) = mid;
      }
      y = hi;
      break;
    }
  }
  if (!y || !std::isfinite(*y) || !(*y > x) || *y > search_limit) return std::nullopt;
  if (std::abs(std::abs((*this)(x, *y)) - target) > 1e-9) return std::nullopt;
  return y;
}

std::string to_string(ConstraintMode mode) { return mode == ConstraintMode::Hard ? "hard" : "soft"; }

std::string to_string(FairnessMeasure::Kind kind) {
  switch (kind) {
    case FairnessMeasure::Kind::Price:
      return "price";
    case FairnessMeasure::Kind::Demand:
      return "demand";
    case FairnessMeasure::Kind::Custom:
      return "custom";
  }
  return "?";
}

void FairnessSpec::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    std::ostringstream msg;
    msg << "lambda: must lie in [0, 1], got " << lambda;
    throw ConfigError(msg.str());
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma: must be >= 0");
}

std::string FairnessSpec::describe() const {
  std::ostringstream out;
  out.precision(17);
  out << "measure=" << measure.name() << ";lambda=" << lambda << ";mode=" << to_string(mode)
      << ";gamma=" << gamma << ";f=" << discrepancy.name();
  return out.str();
}

double FairnessSpec::max_gap(const MarketInstance& instance, std::span<const double> prices) const {
  const std::size_t n = instance.groups();
  double gap = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mi = measure.true_value(instance.curves[i], prices[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double mj = measure.true_value(instance.curves[j], prices[j]);
      gap = std::max(gap, pair_gap(mi, mj));
    }
  }
  return gap;
}

}  // namespace fairprice
