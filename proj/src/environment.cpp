#include "fairprice/environment.hpp"

#include <sstream>

namespace fairprice {

const char* to_string(Stage stage) {
  switch (stage) {
    case Stage::I:
      return "I";
    case Stage::II:
      return "II";
    case Stage::III:
      return "III";
  }
  return "?";
}

Environment::Environment(const MarketInstance& instance, std::int64_t horizon, std::uint64_t seed,
                         PeriodSink* sink)
    : instance_(instance),
      horizon_(horizon),
      rng_(seed),
      sink_(sink),
      prices_(instance.groups()),
      demands_(instance.groups()),
      cached_means_(instance.groups()) {
  if (horizon < 1) throw ConfigError("T: horizon must be >= 1");
}

std::span<const double> Environment::post(std::span<const double> prices) {
  if (elapsed_ >= horizon_) throw BudgetExhausted();
  const std::size_t n = groups();
  if (prices.size() != n) throw ConfigError("post: one price per group required");
  const auto& dom = domain();
  for (std::size_t i = 0; i < n; ++i) {
    if (!dom.contains(prices[i], 1e-9)) {
      std::ostringstream msg;
      msg << "post: price " << prices[i] << " outside [" << dom.lo << ", " << dom.hi << "]";
      throw DomainError(msg.str());
    }
    prices_[i] = dom.clamp(prices[i]);
  }
  if (cached_prices_ != prices_) {
    cached_prices_ = prices_;
    for (std::size_t i = 0; i < n; ++i) cached_means_[i] = instance_.curves[i].demand(prices_[i]);
  }
  for (std::size_t i = 0; i < n; ++i)
    demands_[i] = sample_from_mean(cached_means_[i], instance_.noise, rng_);
  ++elapsed_;
  if (sink_) sink_->on_period(stage_, prices_, demands_);
  return demands_;
}

std::span<const double> Environment::post_uniform(double price) {
  std::vector<double> prices(groups(), price);
  return post(prices);
}

}  // namespace fairprice
