#include "fairprice/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace fairprice {

namespace {

constexpr double kGoldenRatio = 0.6180339887498949;
constexpr int kGoldenCap = 200;

using Objective = std::function<double(double)>;

struct Best {
  double x;
  double value;
};

Best grid_max(const Objective& fn, double lo, double hi, double step) {
  const auto n = static_cast<std::int64_t>(std::ceil((hi - lo) / step - 1e-9));
  Best best{lo, fn(lo)};
  for (std::int64_t k = 1; k <= n; ++k) {
    const double x = k == n ? hi : lo + static_cast<double>(k) * step;
    const double v = fn(x);
    if (v > best.value) best = {x, v};
  }
  return best;
}

// Golden-section maximization on [a, b]; nullopt when the cap is hit.
std::optional<Best> golden(const Objective& fn, double a, double b, double tol) {
  double x1 = b - kGoldenRatio * (b - a);
  double x2 = a + kGoldenRatio * (b - a);
  double f1 = fn(x1);
  double f2 = fn(x2);
  for (int it = 0; it < kGoldenCap; ++it) {
    if (b - a <= tol) {
      const double mid = 0.5 * (a + b);
      return Best{mid, fn(mid)};
    }
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGoldenRatio * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGoldenRatio * (b - a);
      f2 = fn(x2);
    }
  }
  return std::nullopt;
}

// Coarse bracket then golden refinement; the coarse argmax is kept if better.
double maximize_1d(const Objective& fn, double lo, double hi, double tol, bool unimodal) {
  if (!(hi > lo)) return lo;
  if (!unimodal) return grid_max(fn, lo, hi, tol).x;
  const double coarse = 100.0 * tol;
  const Best seed = grid_max(fn, lo, hi, coarse);
  const double a = std::max(lo, seed.x - coarse);
  const double b = std::min(hi, seed.x + coarse);
  Best refined = seed;
  if (auto g = golden(fn, a, b, tol)) {
    refined = *g;
  } else {
    refined = grid_max(fn, a, b, tol);
  }
  // Bracket endpoints matter when the maximum sits on the boundary.
  for (double x : {a, b}) {
    const double v = fn(x);
    if (v > refined.value) refined = {x, v};
  }
  return refined.value >= seed.value ? refined.x : seed.x;
}

bool structural(const MarketInstance& instance, const FairnessSpec& spec) {
  return spec.measure.kind() == FairnessMeasure::Kind::Price &&
         spec.discrepancy.kind() == DiscrepancyFunction::Kind::Difference && instance.regular();
}

std::vector<double> price_grid(const PriceInterval& range, double step) {
  const auto n = static_cast<std::int64_t>(std::ceil(range.width() / step - 1e-9));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(n) + 1);
  for (std::int64_t k = 0; k <= n; ++k)
    grid.push_back(k == n ? range.hi : range.lo + static_cast<double>(k) * step);
  return grid;
}

// One group's candidates sorted by measure value, with range-max over revenue.
class SortedGroup {
 public:
  SortedGroup(const DemandCurve& curve, const FairnessMeasure& measure,
              const std::vector<double>& grid)
      : grid_(grid) {
    const std::size_t n = grid.size();
    revenue_.resize(n);
    measure_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      revenue_[k] = curve.revenue(grid[k]);
      measure_[k] = measure.true_value(curve, grid[k]);
    }
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return measure_[a] < measure_[b]; });
    sorted_measure_.resize(n);
    for (std::size_t r = 0; r < n; ++r) sorted_measure_[r] = measure_[order_[r]];
    build_table();
  }

  std::size_t size() const { return grid_.size(); }
  double revenue(std::size_t k) const { return revenue_[k]; }
  double measure(std::size_t k) const { return measure_[k]; }

  /// Rank range [first, last) of candidates whose measure y satisfies ok(y),
  /// where ok holds on a contiguous block of y values containing x if any.
  template <class Ok>
  std::pair<std::size_t, std::size_t> feasible_ranks(double x, Ok ok) const {
    const auto& m = sorted_measure_;
    const std::size_t pivot =
        static_cast<std::size_t>(std::lower_bound(m.begin(), m.end(), x) - m.begin());
    // Left side: values below x, feasibility rises toward the pivot.
    std::size_t lo = 0, hi = pivot;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (ok(m[mid])) hi = mid;
      else lo = mid + 1;
    }
    const std::size_t first = lo;
    // Right side: values at or above x, feasibility falls away from the pivot.
    lo = pivot;
    hi = m.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (ok(m[mid])) lo = mid + 1;
      else hi = mid;
    }
    return {first, lo};
  }

  /// Original index of the best revenue among ranks [first, last); ties go to
  /// the smallest original index.
  std::size_t best_in(std::size_t first, std::size_t last) const {
    const std::size_t len = last - first;
    const int level = std::bit_width(len) - 1;
    const std::size_t a = table_[static_cast<std::size_t>(level)][first];
    const std::size_t b = table_[static_cast<std::size_t>(level)][last - (std::size_t{1} << level)];
    return better(a, b) ? a : b;
  }

 private:
  bool better(std::size_t a, std::size_t b) const {
    if (revenue_[a] != revenue_[b]) return revenue_[a] > revenue_[b];
    return a < b;
  }

  void build_table() {
    const std::size_t n = order_.size();
    table_.clear();
    table_.push_back(order_);
    for (std::size_t width = 2; width <= n; width *= 2) {
      const auto& prev = table_.back();
      std::vector<std::size_t> next(n - width + 1);
      for (std::size_t i = 0; i + width <= n; ++i) {
        const std::size_t a = prev[i];
        const std::size_t b = prev[i + width / 2];
        next[i] = better(a, b) ? a : b;
      }
      table_.push_back(std::move(next));
    }
  }

  const std::vector<double>& grid_;
  std::vector<double> revenue_;
  std::vector<double> measure_;
  std::vector<std::size_t> order_;
  std::vector<double> sorted_measure_;
  std::vector<std::vector<std::size_t>> table_;
};

double total(const MarketInstance& instance, const std::vector<double>& prices) {
  return instance.total_revenue(prices);
}

void require_price_pair(const MarketInstance& instance, const FairnessSpec& spec) {
  if (instance.groups() != 2) throw ConfigError("constrained_pair_optimum: needs exactly 2 groups");
  if (spec.measure.kind() != FairnessMeasure::Kind::Price ||
      spec.discrepancy.kind() != DiscrepancyFunction::Kind::Difference)
    throw ConfigError("constrained_pair_optimum: needs the price measure with plain differences");
}

}  // namespace

double unconstrained_optimum(const DemandCurve& curve, double tol) {
  if (!(tol > 0.0 && tol <= 1e-2)) throw ConfigError("tol: must lie in (0, 1e-2]");
  const auto& dom = curve.domain();
  return maximize_1d([&](double p) { return curve.revenue(p); }, dom.lo, dom.hi, tol,
                     curve.regular());
}

std::pair<double, double> constrained_pair_optimum(const MarketInstance& instance,
                                                   const FairnessSpec& spec, double tol) {
  require_price_pair(instance, spec);
  if (!instance.regular()) {
    auto p = brute_force_constrained(instance, spec, 1e-3);
    return {p[0], p[1]};
  }
  const auto& c1 = instance.curves[0];
  const auto& c2 = instance.curves[1];
  const double s1 = unconstrained_optimum(c1, tol);
  const double s2 = unconstrained_optimum(c2, tol);
  const double g = spec.lambda * (s1 - s2);  // p1 - p2 at the optimum
  const auto& dom = instance.domain();
  const double lo = dom.lo + std::max(0.0, g);
  const double hi = dom.hi + std::min(0.0, g);
  if (lo > hi + 1e-12) throw ConfigError("constrained_pair_optimum: gap wider than the interval");
  const double q = maximize_1d(
      [&](double x) { return c1.revenue(x) + c2.revenue(dom.clamp(x - g)); }, lo, std::max(lo, hi),
      tol, true);
  return {q, dom.clamp(q - g)};
}

std::vector<double> constrained_multi_optimum(const MarketInstance& instance,
                                              const FairnessSpec& spec, double tol) {
  if (spec.measure.kind() != FairnessMeasure::Kind::Price ||
      spec.discrepancy.kind() != DiscrepancyFunction::Kind::Difference)
    throw ConfigError("constrained_multi_optimum: needs the price measure with plain differences");
  const std::size_t n = instance.groups();
  std::vector<double> sharp(n);
  for (std::size_t i = 0; i < n; ++i) sharp[i] = unconstrained_optimum(instance.curves[i], tol);
  const auto [mn, mx] = std::minmax_element(sharp.begin(), sharp.end());
  const double width = spec.lambda * (*mx - *mn);
  const auto& dom = instance.domain();
  std::vector<double> prices(n);
  auto place = [&](double left) {
    for (std::size_t i = 0; i < n; ++i) prices[i] = std::clamp(sharp[i], left, left + width);
    return total(instance, prices);
  };
  const double left = maximize_1d(place, dom.lo, dom.hi - width, tol, instance.regular());
  place(left);
  return prices;
}

std::vector<double> grid_constrained_maximizer(const MarketInstance& instance,
                                               const FairnessSpec& spec,
                                               std::span<const std::vector<double>> grids,
                                               double gap_bound) {
  const std::size_t n = instance.groups();
  if (n > 3) throw ConfigError("brute force: at most 3 groups (grid size grows as step^-N)");
  if (grids.size() != n) throw ConfigError("brute force: one grid per group required");
  const double bound = gap_bound + kFairnessSlack;
  auto ok_with = [&](double x) {
    return [&spec, x, bound](double y) { return spec.pair_gap(x, y) <= bound; };
  };

  std::vector<SortedGroup> groups;
  groups.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    groups.emplace_back(instance.curves[i], spec.measure, grids[i]);

  double best = -INFINITY;
  std::vector<std::size_t> arg;
  if (n == 2) {
    const auto& g1 = groups[0];
    const auto& g2 = groups[1];
    for (std::size_t a = 0; a < g1.size(); ++a) {
      auto [first, last] = g2.feasible_ranks(g1.measure(a), ok_with(g1.measure(a)));
      if (first >= last) continue;
      const std::size_t b = g2.best_in(first, last);
      const double value = g1.revenue(a) + g2.revenue(b);
      if (value > best) {
        best = value;
        arg = {a, b};
      }
    }
  } else {
    const auto& g1 = groups[0];
    const auto& g2 = groups[1];
    const auto& g3 = groups[2];
    for (std::size_t a = 0; a < g1.size(); ++a) {
      const double x = g1.measure(a);
      auto [f3a, l3a] = g3.feasible_ranks(x, ok_with(x));
      if (f3a >= l3a) continue;
      for (std::size_t b = 0; b < g2.size(); ++b) {
        const double y = g2.measure(b);
        if (!(spec.pair_gap(x, y) <= bound)) continue;
        auto [f3b, l3b] = g3.feasible_ranks(y, ok_with(y));
        const std::size_t first = std::max(f3a, f3b);
        const std::size_t last = std::min(l3a, l3b);
        if (first >= last) continue;
        const std::size_t c = g3.best_in(first, last);
        const double value = g1.revenue(a) + g2.revenue(b) + g3.revenue(c);
        if (value > best) {
          best = value;
          arg = {a, b, c};
        }
      }
    }
  }
  if (arg.empty()) throw std::runtime_error("brute force: no feasible grid point");
  std::vector<double> prices(n);
  for (std::size_t i = 0; i < n; ++i) prices[i] = grids[i][arg[i]];
  return prices;
}

std::vector<double> brute_force_constrained(const MarketInstance& instance,
                                            const FairnessSpec& spec, double grid_step) {
  if (instance.groups() > 3)
    throw ConfigError("brute force: at most 3 groups (grid size grows as step^-N)");
  if (!(grid_step >= 1e-4 - 1e-15)) throw ConfigError("grid_step: must be >= 1e-4");
  std::vector<double> sharp;
  for (const auto& c : instance.curves) sharp.push_back(unconstrained_optimum(c));
  const double gap_bound = spec.lambda * spec.max_gap(instance, sharp);
  const auto grid = price_grid(instance.domain(), grid_step);
  std::vector<std::vector<double>> grids(instance.groups(), grid);
  return grid_constrained_maximizer(instance, spec, grids, gap_bound);
}

ClairvoyantSolution solve_clairvoyant(const MarketInstance& instance, const FairnessSpec& spec,
                                      const OracleOptions& options) {
  spec.validate();
  ClairvoyantSolution sol;
  sol.lambda = spec.lambda;
  for (const auto& c : instance.curves) sol.p_sharp.push_back(unconstrained_optimum(c, options.tol));
  sol.revenue_sharp = total(instance, sol.p_sharp);
  sol.gap_sharp = spec.max_gap(instance, sol.p_sharp);
  const double gap_bound = spec.lambda * sol.gap_sharp;

  if (spec.max_gap(instance, sol.p_sharp) <= gap_bound + kFairnessSlack) {
    sol.p_star = sol.p_sharp;
  } else if (structural(instance, spec)) {
    if (instance.groups() == 2) {
      auto [a, b] = constrained_pair_optimum(instance, spec, options.tol);
      sol.p_star = {a, b};
    } else {
      sol.p_star = constrained_multi_optimum(instance, spec, options.tol);
    }
  } else {
    if (instance.groups() > 3)
      throw ConfigError("oracle: non-structural specs are limited to 3 groups");
    const auto grid = price_grid(instance.domain(), options.grid_step);
    std::vector<std::vector<double>> grids(instance.groups(), grid);
    sol.p_star = grid_constrained_maximizer(instance, spec, grids, gap_bound);
    if (options.refine) {
      const double step = options.grid_step;
      std::vector<std::vector<double>> local;
      for (double p : sol.p_star) {
        const auto& dom = instance.domain();
        PriceInterval box(std::max(dom.lo, p - 2.0 * step), std::min(dom.hi, p + 2.0 * step));
        local.push_back(price_grid(box, step / 50.0));
      }
      try {
        auto polished = grid_constrained_maximizer(instance, spec, local, gap_bound);
        if (total(instance, polished) > total(instance, sol.p_star)) sol.p_star = polished;
      } catch (const std::runtime_error&) {
        // keep the coarse maximizer
      }
    }
  }
  sol.revenue_star = total(instance, sol.p_star);
  return sol;
}

std::vector<std::pair<double, double>> revenue_loss_curve(const MarketInstance& instance,
                                                          const FairnessSpec& spec,
                                                          std::span<const double> lambdas,
                                                          const OracleOptions& options) {
  std::vector<std::pair<double, double>> out;
  for (double lambda : lambdas) {
    FairnessSpec s = spec;
    s.lambda = lambda;
    const auto sol = solve_clairvoyant(instance, s, options);
    out.emplace_back(lambda, sol.revenue_sharp - sol.revenue_star);
  }
  return out;
}

}  // namespace fairprice
