#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fairprice/demand.hpp"

namespace fairprice {

/// Exponential pair on [0, 5]: p# = (1, 2).
MarketInstance exp_paper_instance();
/// Linear pair on [0, 5]: p# = (3, 4).
MarketInstance linear_paper_instance();
/// Inverse-proportional pair on [0, 5] (nonregular).
MarketInstance invprop_paper_instance();
/// Three shifted linear groups on [0, 5] with p# = (3, 3.5, 4).
MarketInstance linear_three_group_instance();

/// Parses "linear(-0.1, 0.6)", "exponential(0.5, 1[, pivot])",
/// "inverse_proportional(2)", "lb(R2, 20, 0.005)" or
/// "tabulated(0:1, 2.5:0.5, 5:0)".
CurveKind parse_curve_kind(std::string_view text);

/// Named instances. Built-ins: exp-paper, linear-paper, invprop-paper,
/// linear-3group, lb-pair(A,h) (instance I) and lb-pair(A,h)' (instance I').
class InstanceCatalog {
 public:
  InstanceCatalog() = default;

  void add(MarketInstance instance);
  bool contains(std::string_view name) const;
  MarketInstance get(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, MarketInstance, std::less<>> custom_;
};

}  // namespace fairprice
