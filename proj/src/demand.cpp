#include "fairprice/demand.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fairprice {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

bool compute_regular(const CurveKind& kind) {
  return std::visit(
      overloaded{
          [](const curves::Linear& c) { return c.slope < 0.0; },
          [](const curves::Exponential& c) { return c.scale > 0.0 && c.rate > 0.0; },
          [](const curves::InverseProportional&) { return false; },
          [](const curves::LowerBound&) { return true; },
          [](const curves::Tabulated& t) {
            for (std::size_t i = 1; i < t.demands.size(); ++i) {
              if (!(t.demands[i] < t.demands[i - 1])) return false;
            }
            return true;
          },
      },
      kind);
}

void validate_kind(const CurveKind& kind, const PriceInterval& domain) {
  std::visit(overloaded{
                 [](const curves::Linear&) {},
                 [](const curves::Exponential& c) {
                   if (!(c.scale >= 0.0) || !std::isfinite(c.rate))
                     throw ConfigError("exponential curve: scale must be >= 0 and rate finite");
                 },
                 [](const curves::InverseProportional& c) {
                   if (!(c.numerator > 0.0))
                     throw ConfigError("inverse_proportional curve: numerator must be > 0");
                 },
                 [&](const curves::LowerBound& c) {
                   if (!(c.A >= 1.0) || !(c.h >= 0.0))
                     throw ConfigError("lb curve: requires A >= 1 and h >= 0");
                   if (domain.lo < 1.0 || domain.hi > 2.0)
                     throw ConfigError("lb curve: domain must lie within [1, 2]");
                 },
                 [&](const curves::Tabulated& t) {
                   if (t.prices.size() < 2 || t.prices.size() != t.demands.size())
                     throw ConfigError("tabulated curve: need >= 2 (price, demand) knots");
                   for (std::size_t i = 1; i < t.prices.size(); ++i) {
                     if (!(t.prices[i] > t.prices[i - 1]))
                       throw ConfigError("tabulated curve: knot prices must increase strictly");
                   }
                   for (double d : t.demands) {
                     if (!(d >= 0.0 && d <= 1.0))
                       throw ConfigError("tabulated curve: demands must lie in [0, 1]");
                   }
                   if (domain.lo < t.prices.front() || domain.hi > t.prices.back())
                     throw ConfigError("tabulated curve: domain exceeds the knot range");
                 },
             },
             kind);
}

}  // namespace

PriceInterval::PriceInterval(double lo_, double hi_) : lo(lo_), hi(hi_) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo < 0.0 || !(lo < hi)) {
    std::ostringstream msg;
    msg << "price interval: need finite 0 <= lo < hi, got [" << lo << ", " << hi << "]";
    throw ConfigError(msg.str());
  }
}

double lb_profit(curves::LbProfile which, double A, double h, double p) {
  const double s = std::sqrt(h);
  switch (which) {
    case curves::LbProfile::R1: {
      const double u = p - 1.0 - s / 4.0;
      return 0.25 - u * u / A;
    }
    case curves::LbProfile::R2: {
      if (p < 1.0 + 5.0 * s / 4.0) {
        const double u = p - 1.0 + s / 4.0;
        return 0.25 - u * u / (2.0 * A);
      }
      if (p < 1.0 + 7.0 * s / 4.0) {
        const double u = p - 1.0 - 3.0 * s / 4.0;
        return 0.25 - 3.0 * u * u / (2.0 * A) - 3.0 * h / (4.0 * A);
      }
      const double u = p - 1.0 - s / 4.0;
      return 0.25 - u * u / A;
    }
    case curves::LbProfile::R3: {
      const double u = p - 2.0;
      return 0.125 - u * u / A;
    }
  }
  return 0.0;
}

DemandCurve::DemandCurve(CurveKind kind, PriceInterval domain, double cost)
    : kind_(std::move(kind)), domain_(domain), cost_(cost) {
  if (!(cost_ >= 0.0) || !std::isfinite(cost_)) throw ConfigError("curve: cost must be >= 0");
  validate_kind(kind_, domain_);
  regular_ = compute_regular(kind_);
}

double DemandCurve::demand_unchecked(double p) const {
  return std::visit(
      overloaded{
          [p](const curves::Linear& c) { return clamp01(c.slope * p + c.intercept); },
          [p](const curves::Exponential& c) {
            return clamp01(c.scale * std::exp(c.rate * (c.pivot - p)));
          },
          [p](const curves::InverseProportional& c) {
            if (p <= 0.0) return 1.0;
            return clamp01(c.numerator / p - 1.0);
          },
          [p](const curves::LowerBound& c) { return lb_profit(c.which, c.A, c.h, p) / p; },
          [p](const curves::Tabulated& t) {
            auto it = std::upper_bound(t.prices.begin(), t.prices.end(), p);
            if (it == t.prices.begin()) return t.demands.front();
            if (it == t.prices.end()) return t.demands.back();
            const auto i = static_cast<std::size_t>(it - t.prices.begin());
            const double w = (p - t.prices[i - 1]) / (t.prices[i] - t.prices[i - 1]);
            return t.demands[i - 1] + w * (t.demands[i] - t.demands[i - 1]);
          },
      },
      kind_);
}

double DemandCurve::demand(double p) const {
  if (!domain_.contains(p)) {
    std::ostringstream msg;
    msg << "price " << p << " outside [" << domain_.lo << ", " << domain_.hi << "]";
    throw DomainError(msg.str());
  }
  return demand_unchecked(domain_.clamp(p));
}

double DemandCurve::revenue(double p) const { return (p - cost_) * demand(p); }

std::string DemandCurve::describe() const {
  std::ostringstream out;
  out.precision(17);
  std::visit(overloaded{
                 [&](const curves::Linear& c) {
                   out << "linear(" << c.slope << "," << c.intercept << ")";
                 },
                 [&](const curves::Exponential& c) {
                   out << "exponential(" << c.scale << "," << c.rate << "," << c.pivot << ")";
                 },
                 [&](const curves::InverseProportional& c) {
                   out << "inverse_proportional(" << c.numerator << ")";
                 },
                 [&](const curves::LowerBound& c) {
                   const char* names[] = {"R1", "R2", "R3"};
                   out << "lb(" << names[static_cast<int>(c.which)] << "," << c.A << "," << c.h
                       << ")";
                 },
                 [&](const curves::Tabulated& t) {
                   out << "tabulated(";
                   for (std::size_t i = 0; i < t.prices.size(); ++i) {
                     out << (i ? "," : "") << t.prices[i] << ":" << t.demands[i];
                   }
                   out << ")";
                 },
             },
             kind_);
  out << "@[" << domain_.lo << "," << domain_.hi << "]c=" << cost_;
  return out.str();
}

double eval_demand(const DemandCurve& curve, double p) { return curve.demand(p); }
double eval_revenue(const DemandCurve& curve, double p) { return curve.revenue(p); }

RegularityScan scan_regularity(const DemandCurve& curve, double grid_step) {
  RegularityScan scan;
  const auto& dom = curve.domain();
  const auto n = static_cast<std::int64_t>(std::ceil(dom.width() / grid_step));
  double prev_p = dom.lo;
  double prev_d = curve.demand_unchecked(prev_p);
  scan.min_slope = INFINITY;
  for (std::int64_t k = 1; k <= n; ++k) {
    const double p = k == n ? dom.hi : dom.lo + static_cast<double>(k) * grid_step;
    const double d = curve.demand_unchecked(p);
    if (!(d < prev_d)) scan.strictly_decreasing = false;
    const double slope = std::abs(d - prev_d) / (p - prev_p);
    scan.max_slope = std::max(scan.max_slope, slope);
    scan.min_slope = std::min(scan.min_slope, slope);
    prev_p = p;
    prev_d = d;
  }
  return scan;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

NoiseModel NoiseModel::truncated_additive(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw ConfigError("noise: truncated_additive sigma must be >= 0");
  return {Kind::TruncatedAdditive, sigma};
}

std::string NoiseModel::describe() const {
  if (kind == Kind::Bernoulli) return "bernoulli";
  std::ostringstream out;
  out.precision(17);
  out << "truncated:" << sigma;
  return out.str();
}

double sample_from_mean(double mean, const NoiseModel& noise, Rng& rng) {
  if (noise.kind == NoiseModel::Kind::Bernoulli) {
    // u in [0, 1): mean 1 always sells, mean 0 never does.
    return rng.uniform() < mean ? 1.0 : 0.0;
  }
  if (noise.sigma == 0.0) return mean;
  return clamp01(mean + noise.sigma * rng.normal());
}

double sample_demand(const DemandCurve& curve, double p, const NoiseModel& noise, Rng& rng) {
  return sample_from_mean(curve.demand(p), noise, rng);
}

MarketInstance::MarketInstance(std::string name_, std::vector<DemandCurve> curves_,
                               NoiseModel noise_)
    : name(std::move(name_)), curves(std::move(curves_)), noise(noise_) {
  if (curves.size() < 2) throw ConfigError("instance " + name + ": needs at least 2 groups");
  for (const auto& c : curves) {
    if (!(c.domain() == curves.front().domain()) || c.cost() != curves.front().cost())
      throw ConfigError("instance " + name + ": all curves must share domain and cost");
  }
}

bool MarketInstance::regular() const {
  return std::all_of(curves.begin(), curves.end(), [](const auto& c) { return c.regular(); });
}

double MarketInstance::total_revenue(std::span<const double> prices) const {
  double total = 0.0;
  for (std::size_t i = 0; i < curves.size(); ++i) total += curves[i].revenue(prices[i]);
  return total;
}

}  // namespace fairprice
