#pragma once

#include <array>
#include <string>

#include "fairprice/demand.hpp"

namespace fairprice {

/// The two near-indistinguishable instances I = (d1, d3) and I' = (d2, d3)
/// on [1, 2] with zero cost and Bernoulli demand.
struct LowerBoundPair {
  MarketInstance base;         // I
  MarketInstance alternative;  // I'
};

/// Requires 20 <= A <= 30 and 0 < h < 0.01 unless `diagnostic` is set, in
/// which case any A >= 1 and h >= 0 are accepted.
LowerBoundPair make_lower_bound_pair(double A, double h, bool diagnostic = false);

/// lb_profile curve d = R_which / p on [1, 2].
DemandCurve make_lb_curve(curves::LbProfile which, double A, double h);

struct LbCheck {
  char item;                // 'a' .. 'f'
  std::string description;
  bool passed = false;
  double observed = 0.0;    // worst value seen on the grid
  double bound = 0.0;       // threshold it was compared against
  std::string where;        // location of the worst value, when informative
};

struct LbReport {
  double A = 0.0;
  double h = 0.0;
  double grid_step = 0.0;
  std::array<LbCheck, 6> checks;

  bool all_passed() const;
  std::string format() const;
};

/// Numerically checks every structural property of the hard instances on a
/// uniform grid over [1, 2]. Failures are reported, never thrown; invalid
/// (A, h) or a grid coarser than 1e-4 raise ConfigError.
LbReport verify_lb_properties(double A, double h, double grid_step = 1e-4);

}  // namespace fairprice
