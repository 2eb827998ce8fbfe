#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "fairprice/demand.hpp"

namespace fairprice {

/// Phase of an explore-then-commit policy: I (unconstrained search),
/// II (constrained checkpoints), III (commit).
enum class Stage : std::uint8_t { I = 1, II = 2, III = 3 };

const char* to_string(Stage stage);

/// Thrown by Environment::post when the horizon is used up. Policies treat it
/// as normal termination.
class BudgetExhausted : public std::runtime_error {
 public:
  BudgetExhausted() : std::runtime_error("selling horizon exhausted") {}
};

/// Receives every simulated period.
class PeriodSink {
 public:
  virtual ~PeriodSink() = default;
  virtual void on_period(Stage stage, std::span<const double> prices,
                         std::span<const double> demands) = 0;
};

/// Budgeted pricing environment for one trial. Each post consumes one period.
class Environment {
 public:
  Environment(const MarketInstance& instance, std::int64_t horizon, std::uint64_t seed,
              PeriodSink* sink = nullptr);
  /// The instance is held by reference and must outlive the environment.
  Environment(MarketInstance&&, std::int64_t, std::uint64_t, PeriodSink* = nullptr) = delete;

  /// Offers one price per group; returns the realized demands, valid until
  /// the next call. Prices are clamped into the domain after a tolerance check.
  std::span<const double> post(std::span<const double> prices);
  /// Offers the same price to every group.
  std::span<const double> post_uniform(double price);

  const MarketInstance& instance() const { return instance_; }
  std::size_t groups() const { return instance_.groups(); }
  const PriceInterval& domain() const { return instance_.domain(); }
  double cost() const { return instance_.cost(); }

  std::int64_t horizon() const { return horizon_; }
  std::int64_t elapsed() const { return elapsed_; }
  std::int64_t remaining() const { return horizon_ - elapsed_; }

  Stage stage() const { return stage_; }
  void set_stage(Stage stage) { stage_ = stage; }

 private:
  const MarketInstance& instance_;
  std::int64_t horizon_;
  std::int64_t elapsed_ = 0;
  Rng rng_;
  PeriodSink* sink_;
  Stage stage_ = Stage::I;
  std::vector<double> prices_;
  std::vector<double> demands_;
  std::vector<double> cached_prices_;
  std::vector<double> cached_means_;
};

}  // namespace fairprice
