#include "fairprice/lower_bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fairprice {

namespace {

using curves::LbProfile;

constexpr LbProfile kProfiles[] = {LbProfile::R1, LbProfile::R2, LbProfile::R3};
constexpr double kPriceStep = 1e-5;   // central differences in price
constexpr double kDemandStep = 1e-4;  // second differences in demand
constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_parameter_range(double A, double h) {
  std::ostringstream msg;
  if (!(A >= 20.0 && A <= 30.0)) {
    msg << "A = " << A << " outside [20, 30]; the hard-instance properties are only "
        << "guaranteed for 20 <= A <= 30 and 0 < h < 0.01";
    throw ConfigError(msg.str());
  }
  if (!(h > 0.0 && h < 0.01)) {
    msg << "h = " << h << " outside (0, 0.01); the hard-instance properties are only "
        << "guaranteed for 20 <= A <= 30 and 0 < h < 0.01";
    throw ConfigError(msg.str());
  }
}

double lb_demand(LbProfile which, double A, double h, double p) {
  return lb_profit(which, A, h, p) / p;
}

// Price with d(p) == target on [1, 2] for a decreasing d.
double invert_demand(LbProfile which, double A, double h, double target) {
  double lo = 1.0;
  double hi = 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (lb_demand(which, A, h, mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double bernoulli_kl(double p, double q) {
  double kl = 0.0;
  if (p > 0.0) kl += p * std::log(p / q);
  if (p < 1.0) kl += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  return kl;
}

}  // namespace

DemandCurve make_lb_curve(LbProfile which, double A, double h) {
  return DemandCurve(curves::LowerBound{which, A, h}, PriceInterval(1.0, 2.0), 0.0);
}

LowerBoundPair make_lower_bound_pair(double A, double h, bool diagnostic) {
  if (!diagnostic) {
    check_parameter_range(A, h);
  } else if (!(A >= 1.0) || !(h >= 0.0)) {
    throw ConfigError("lb-pair: diagnostic mode still requires A >= 1 and h >= 0");
  }
  std::ostringstream suffix;
  suffix.precision(17);
  suffix << "(" << A << "," << h << ")";
  auto d1 = make_lb_curve(LbProfile::R1, A, h);
  auto d2 = make_lb_curve(LbProfile::R2, A, h);
  auto d3 = make_lb_curve(LbProfile::R3, A, h);
  return LowerBoundPair{
      MarketInstance("lb-pair" + suffix.str(), {d1, d3}, NoiseModel::bernoulli()),
      MarketInstance("lb-pair" + suffix.str() + "'", {d2, d3}, NoiseModel::bernoulli()),
  };
}

bool LbReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const LbCheck& c) { return c.passed; });
}

std::string LbReport::format() const {
  std::ostringstream out;
  out << "lower-bound instance check A=" << A << " h=" << h << " step=" << grid_step << "\n";
  for (const auto& c : checks) {
    out << "  (" << c.item << ") " << (c.passed ? "PASS" : "FAIL") << "  " << c.description
        << "  observed=" << c.observed << " bound=" << c.bound;
    if (!c.where.empty()) out << "  (" << c.where << ")";
    out << "\n";
  }
  out << (all_passed() ? "all properties hold" : "some properties FAILED") << "\n";
  return out.str();
}

LbReport verify_lb_properties(double A, double h, double grid_step) {
  check_parameter_range(A, h);
  if (!(grid_step > 0.0 && grid_step <= 1e-4))
    throw ConfigError("grid_step: must lie in (0, 1e-4]");

  LbReport report;
  report.A = A;
  report.h = h;
  report.grid_step = grid_step;

  const double s = std::sqrt(h);
  const auto n = static_cast<std::int64_t>(std::llround(1.0 / grid_step));
  auto grid = [&](std::int64_t k) { return k == n ? 2.0 : 1.0 + static_cast<double>(k) * grid_step; };

  // (a) demand range.
  {
    double lo = INFINITY, hi = -INFINITY;
    for (auto which : kProfiles) {
      for (std::int64_t k = 0; k <= n; ++k) {
        const double d = lb_demand(which, A, h, grid(k));
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
    }
    auto& c = report.checks[0];
    c.item = 'a';
    c.description = "d_i(p) in [1/20, 1/4] on [1, 2]";
    c.passed = lo >= 1.0 / 20.0 && hi <= 0.25;
    c.observed = lo < 1.0 / 20.0 ? lo : hi;
    c.bound = lo < 1.0 / 20.0 ? 1.0 / 20.0 : 0.25;
  }

  // (b) continuity and matching one-sided derivatives at the R2 breakpoints.
  {
    const double breaks[] = {1.0 + 5.0 * s / 4.0, 1.0 + 7.0 * s / 4.0};
    const double delta = kPriceStep;
    const double curv_R = 3.0 / A;  // |R''| on every piece
    const double curv_d = 1.0;      // loose bound on |d''| over [1, 2]
    double worst_jump = 0.0;   // value discontinuity
    double worst_ratio = 0.0;  // derivative mismatch / allowed mismatch
    for (double b : breaks) {
      for (auto which : kProfiles) {
        auto R = [&](double p) { return lb_profit(which, A, h, p); };
        auto d = [&](double p) { return lb_demand(which, A, h, p); };
        const double before = std::nextafter(b, 0.0);
        worst_jump = std::max({worst_jump, std::abs(R(before) - R(b)), std::abs(d(before) - d(b))});
        const double slack = 8.0 * kEps / delta;
        const double dR = std::abs((R(b + delta) - R(b)) / delta - (R(b) - R(b - delta)) / delta);
        const double dd = std::abs((d(b + delta) - d(b)) / delta - (d(b) - d(b - delta)) / delta);
        worst_ratio = std::max({worst_ratio, dR / (2.0 * curv_R * delta + slack),
                                dd / (2.0 * curv_d * delta + slack)});
      }
    }
    auto& c = report.checks[1];
    c.item = 'b';
    c.description = "d_i, R_i continuously differentiable at R2 breakpoints";
    c.passed = worst_jump <= 1e-12 && worst_ratio <= 1.0;
    c.observed = worst_ratio;
    c.bound = 1.0;
  }

  // (c) slope bound and strong concavity of R in d.
  {
    double max_slope = -INFINITY;
    std::string slope_at;
    for (auto which : kProfiles) {
      for (std::int64_t k = 0; k <= n; ++k) {
        const double p = grid(k);
        const double slope =
            (lb_demand(which, A, h, p + kPriceStep) - lb_demand(which, A, h, p - kPriceStep)) /
            (2.0 * kPriceStep);
        if (slope > max_slope) {
          max_slope = slope;
          slope_at = std::string("R") + std::to_string(static_cast<int>(which) + 1) + " at p=" + std::to_string(p);
        }
      }
    }
    double worst_second = -INFINITY;  // max second difference minus its fp slack
    for (auto which : kProfiles) {
      const double d_top = lb_demand(which, A, h, 1.0);
      const double d_bottom = lb_demand(which, A, h, 2.0);
      auto R_of_d = [&](double d) { return invert_demand(which, A, h, d) * d; };
      for (double d = d_bottom + kDemandStep; d + kDemandStep <= d_top; d += kDemandStep) {
        const double r_minus = R_of_d(d - kDemandStep);
        const double r_mid = R_of_d(d);
        const double r_plus = R_of_d(d + kDemandStep);
        const double second = r_plus - 2.0 * r_mid + r_minus;
        const double slack = 10.0 * kEps * (std::abs(r_plus) + 2.0 * std::abs(r_mid) + std::abs(r_minus));
        worst_second = std::max(worst_second, second - slack);
      }
    }
    auto& c = report.checks[2];
    c.item = 'c';
    c.description = "dd/dp < -1/40 and R_i concave in d_i";
    c.passed = max_slope < -1.0 / 40.0 && worst_second < 0.0;
    c.observed = max_slope;
    c.bound = -1.0 / 40.0;
    std::ostringstream w;
    w << "max slope on " << slope_at << "; max second difference of R(d) " << worst_second;
    c.where = w.str();
  }

  const double near_end = 1.0 + 7.0 * s / 4.0;
  // (d) closeness of d1 and d2 and (e) their Bernoulli KL divergence.
  {
    double max_diff = 0.0, max_kl = 0.0;
    for (std::int64_t k = 0; k <= n && grid(k) <= near_end; ++k) {
      const double p = grid(k);
      const double a = lb_demand(LbProfile::R1, A, h, p);
      const double b = lb_demand(LbProfile::R2, A, h, p);
      max_diff = std::max(max_diff, std::abs(a - b));
      max_kl = std::max(max_kl, bernoulli_kl(a, b));
    }
    auto& cd = report.checks[3];
    cd.item = 'd';
    cd.description = "|d1 - d2| <= h/(4A) on [1, 1 + 7 sqrt(h)/4]";
    cd.bound = h / (4.0 * A);
    cd.observed = max_diff;
    cd.passed = max_diff <= cd.bound;
    auto& ce = report.checks[4];
    ce.item = 'e';
    ce.description = "KL(Ber(d1) || Ber(d2)) <= 5h^2/(3A^2) on the same interval";
    ce.bound = 5.0 * h * h / (3.0 * A * A);
    ce.observed = max_kl;
    ce.passed = max_kl <= ce.bound;
  }

  // (f) unconstrained maximizers of p d(p).
  {
    const double targets[] = {1.0 + s / 4.0, 1.0, 2.0};
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
      double best_p = 1.0, best_r = -INFINITY;
      for (std::int64_t k = 0; k <= n; ++k) {
        const double p = grid(k);
        const double r = lb_profit(kProfiles[i], A, h, p);
        if (r > best_r) {
          best_r = r;
          best_p = p;
        }
      }
      worst = std::max(worst, std::abs(best_p - targets[i]));
    }
    auto& c = report.checks[5];
    c.item = 'f';
    c.description = "argmax p d_i(p) = (1 + sqrt(h)/4, 1, 2)";
    c.observed = worst;
    c.bound = grid_step;
    c.passed = worst <= grid_step;
  }
  return report;
}

}  // namespace fairprice
