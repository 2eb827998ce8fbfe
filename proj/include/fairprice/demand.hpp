#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fairprice {

/// Raised when a price falls outside a curve's domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised for invalid parameters or configuration; the message names the key.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Closed feasible price range [lo, hi].
struct PriceInterval {
  double lo = 0.0;
  double hi = 1.0;

  PriceInterval() = default;
  PriceInterval(double lo, double hi);

  double width() const { return hi - lo; }
  bool contains(double p, double slack = 1e-12) const {
    return p >= lo - slack && p <= hi + slack;
  }
  double clamp(double p) const { return p < lo ? lo : (p > hi ? hi : p); }

  friend bool operator==(const PriceInterval&, const PriceInterval&) = default;
};

namespace curves {

/// d(p) = slope * p + intercept.
struct Linear {
  double slope;
  double intercept;
};

/// d(p) = scale * exp(rate * (pivot - p)).
struct Exponential {
  double scale;
  double rate;
  double pivot = 1.0;
};

/// d(p) = min(1, max(0, numerator / p - 1)).
struct InverseProportional {
  double numerator;
};

enum class LbProfile { R1, R2, R3 };

/// d(p) = R_which(p) / p for the lower-bound profit profiles on [1, 2].
struct LowerBound {
  LbProfile which;
  double A;
  double h;
};

/// Piecewise-linear interpolation through (price, demand) knots.
struct Tabulated {
  std::vector<double> prices;
  std::vector<double> demands;
};

}  // namespace curves

using CurveKind = std::variant<curves::Linear, curves::Exponential,
                               curves::InverseProportional, curves::LowerBound,
                               curves::Tabulated>;

/// Profit-rate profile R_which(p) of the lower-bound construction.
double lb_profit(curves::LbProfile which, double A, double h, double p);

/// Expected demand function d(p) on a price interval with a marginal cost.
///
/// Values are always in [0, 1]. A curve is `regular` when it is known to be
/// strictly decreasing with a unimodal revenue; inverse-proportional curves
/// and non-decreasing tables are flagged nonregular and oracles fall back to
/// exhaustive grids for them.
class DemandCurve {
 public:
  DemandCurve(CurveKind kind, PriceInterval domain, double cost = 0.0);

  /// Expected demand; throws DomainError outside the domain.
  double demand(double p) const;
  /// (p - c) * d(p); throws DomainError outside the domain.
  double revenue(double p) const;

  const CurveKind& kind() const { return kind_; }
  const PriceInterval& domain() const { return domain_; }
  double cost() const { return cost_; }
  bool regular() const { return regular_; }
  std::string describe() const;

  /// Evaluation without the domain check; callers guarantee p is in range.
  double demand_unchecked(double p) const;

 private:
  CurveKind kind_;
  PriceInterval domain_;
  double cost_;
  bool regular_;
};

double eval_demand(const DemandCurve& curve, double p);
double eval_revenue(const DemandCurve& curve, double p);

/// Result of a dense-grid monotonicity/Lipschitz scan.
struct RegularityScan {
  bool strictly_decreasing = true;
  double max_slope = 0.0;  // sup |d(p) - d(p')| / |p - p'| over grid neighbours
  double min_slope = 0.0;  // inf of the same ratio
};

RegularityScan scan_regularity(const DemandCurve& curve, double grid_step = 1e-4);

/// Portable 64-bit generator. Uniforms are built from the top 53 bits so that
/// sequences do not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Realized-demand model. Bernoulli is the default; truncated additive adds a
/// Gaussian and clips to [0, 1], which biases the mean near 0 and 1. A zero
/// sigma is deterministic (realized == expected).
struct NoiseModel {
  enum class Kind { Bernoulli, TruncatedAdditive };
  Kind kind = Kind::Bernoulli;
  double sigma = 0.0;

  static NoiseModel bernoulli() { return {}; }
  static NoiseModel truncated_additive(double sigma);
  static NoiseModel noiseless() { return truncated_additive(0.0); }
  bool deterministic() const { return kind == Kind::TruncatedAdditive && sigma == 0.0; }
  std::string describe() const;
};

double sample_demand(const DemandCurve& curve, double p, const NoiseModel& noise, Rng& rng);
/// Same draw from a precomputed mean.
double sample_from_mean(double mean, const NoiseModel& noise, Rng& rng);

/// N >= 2 groups sharing one price interval and cost.
struct MarketInstance {
  std::string name;
  std::vector<DemandCurve> curves;
  NoiseModel noise;

  MarketInstance(std::string name, std::vector<DemandCurve> curves,
                 NoiseModel noise = NoiseModel::bernoulli());

  std::size_t groups() const { return curves.size(); }
  const PriceInterval& domain() const { return curves.front().domain(); }
  double cost() const { return curves.front().cost(); }
  bool regular() const;
  double total_revenue(std::span<const double> prices) const;
};

}  // namespace fairprice
