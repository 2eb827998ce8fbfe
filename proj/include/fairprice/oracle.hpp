#pragma once

#include <span>
#include <utility>
#include <vector>

#include "fairprice/demand.hpp"
#include "fairprice/fairness.hpp"

namespace fairprice {

/// Solutions of the unconstrained and fairness-constrained static problems.
struct ClairvoyantSolution {
  std::vector<double> p_sharp;
  std::vector<double> p_star;
  double revenue_sharp = 0.0;
  double revenue_star = 0.0;
  double gap_sharp = 0.0;  // max pairwise measure gap at p_sharp
  double lambda = 1.0;
};

struct OracleOptions {
  double tol = 1e-6;
  double grid_step = 1e-3;  // brute-force step where no structural solver applies
  bool refine = true;       // polish brute-force maximizers on a finer local grid
};

/// argmax_p R(p). Regular curves: coarse bracket at step 100*tol followed by
/// golden-section refinement. Nonregular curves: exhaustive grid at step tol.
double unconstrained_optimum(const DemandCurve& curve, double tol = 1e-6);

/// Two-group hard price fairness via gap tightness: the optimal gap equals
/// lambda times the unconstrained gap, leaving a 1-D search. Falls back to
/// brute_force_constrained for nonregular curves.
std::pair<double, double> constrained_pair_optimum(const MarketInstance& instance,
                                                   const FairnessSpec& spec, double tol = 1e-6);

/// N-group hard price fairness: every price is its p# clamped into a window
/// [L, L + lambda * max gap]; 1-D search over L.
std::vector<double> constrained_multi_optimum(const MarketInstance& instance,
                                              const FairnessSpec& spec, double tol = 1e-6);

/// Exhaustive grid maximizer over the feasible set
/// {max pairwise |f(M_i, M_j)| <= lambda * gap_sharp}, N <= 3.
/// Ties resolve to the lexicographically smallest grid index.
std::vector<double> brute_force_constrained(const MarketInstance& instance,
                                            const FairnessSpec& spec, double grid_step = 1e-3);

/// Brute force over explicit per-group candidate prices. `gap_bound` is the
/// allowed pairwise gap. Exposed for callers that already know gap_sharp.
std::vector<double> grid_constrained_maximizer(const MarketInstance& instance,
                                               const FairnessSpec& spec,
                                               std::span<const std::vector<double>> grids,
                                               double gap_bound);

/// Solves both static problems, choosing the structural solver when the
/// spec allows (price measure, difference discrepancy, regular curves) and
/// the brute-force path otherwise. Soft specs are benchmarked against the
/// hard-constrained solution.
ClairvoyantSolution solve_clairvoyant(const MarketInstance& instance, const FairnessSpec& spec,
                                      const OracleOptions& options = {});

/// (lambda, revenue_sharp - revenue_star) along a lambda grid.
std::vector<std::pair<double, double>> revenue_loss_curve(const MarketInstance& instance,
                                                          const FairnessSpec& spec,
                                                          std::span<const double> lambdas,
                                                          const OracleOptions& options = {});

}  // namespace fairprice
