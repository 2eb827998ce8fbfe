#include "fairprice/catalog.hpp"

#include <cctype>
#include <charconv>
#include <optional>
#include <sstream>

#include "fairprice/lower_bound.hpp"

namespace fairprice {

namespace {

const PriceInterval kPaperDomain{0.0, 5.0};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

double parse_number(std::string_view text, std::string_view context) {
  text = trim(text);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError(std::string(context) + ": cannot parse number '" + std::string(text) + "'");
  }
  return value;
}

// Splits "name(a, b, c)" into name and argument list.
std::pair<std::string_view, std::vector<std::string_view>> split_call(std::string_view text) {
  text = trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')')
    throw ConfigError("curve: expected name(args), got '" + std::string(text) + "'");
  auto name = trim(text.substr(0, open));
  auto inner = trim(text.substr(open + 1, text.size() - open - 2));
  std::vector<std::string_view> args;
  if (!inner.empty()) args = split(inner, ',');
  return {name, args};
}

void expect_args(std::string_view name, const std::vector<std::string_view>& args,
                 std::size_t lo, std::size_t hi) {
  if (args.size() < lo || args.size() > hi) {
    std::ostringstream msg;
    msg << "curve " << name << ": expected " << lo;
    if (hi != lo) msg << ".." << hi;
    msg << " arguments, got " << args.size();
    throw ConfigError(msg.str());
  }
}

std::optional<MarketInstance> lb_pair_from_name(std::string_view name) {
  constexpr std::string_view prefix = "lb-pair(";
  if (name.substr(0, prefix.size()) != prefix) return std::nullopt;
  bool alternative = false;
  if (!name.empty() && name.back() == '\'') {
    alternative = true;
    name.remove_suffix(1);
  }
  if (name.empty() || name.back() != ')')
    throw ConfigError("instance: malformed lb-pair name '" + std::string(name) + "'");
  auto args = split(name.substr(prefix.size(), name.size() - prefix.size() - 1), ',');
  if (args.size() != 2) throw ConfigError("instance: lb-pair needs (A,h)");
  auto pair = make_lower_bound_pair(parse_number(args[0], "lb-pair A"),
                                    parse_number(args[1], "lb-pair h"));
  return alternative ? pair.alternative : pair.base;
}

}  // namespace

MarketInstance exp_paper_instance() {
  return MarketInstance("exp-paper",
                        {DemandCurve(curves::Exponential{0.5, 1.0, 1.0}, kPaperDomain),
                         DemandCurve(curves::Exponential{0.5, 0.5, 1.0}, kPaperDomain)});
}

MarketInstance linear_paper_instance() {
  return MarketInstance("linear-paper",
                        {DemandCurve(curves::Linear{-0.1, 0.6}, kPaperDomain),
                         DemandCurve(curves::Linear{-0.1, 0.8}, kPaperDomain)});
}

MarketInstance invprop_paper_instance() {
  return MarketInstance("invprop-paper",
                        {DemandCurve(curves::InverseProportional{2.0}, kPaperDomain),
                         DemandCurve(curves::InverseProportional{4.0}, kPaperDomain)});
}

MarketInstance linear_three_group_instance() {
  return MarketInstance("linear-3group",
                        {DemandCurve(curves::Linear{-0.1, 0.6}, kPaperDomain),
                         DemandCurve(curves::Linear{-0.1, 0.7}, kPaperDomain),
                         DemandCurve(curves::Linear{-0.1, 0.8}, kPaperDomain)});
}

CurveKind parse_curve_kind(std::string_view text) {
  auto [name, args] = split_call(text);
  if (name == "linear") {
    expect_args(name, args, 2, 2);
    return curves::Linear{parse_number(args[0], "linear slope"),
                          parse_number(args[1], "linear intercept")};
  }
  if (name == "exponential") {
    expect_args(name, args, 2, 3);
    curves::Exponential e{parse_number(args[0], "exponential scale"),
                          parse_number(args[1], "exponential rate")};
    if (args.size() == 3) e.pivot = parse_number(args[2], "exponential pivot");
    return e;
  }
  if (name == "inverse_proportional") {
    expect_args(name, args, 1, 1);
    return curves::InverseProportional{parse_number(args[0], "inverse_proportional numerator")};
  }
  if (name == "lb") {
    expect_args(name, args, 3, 3);
    curves::LbProfile which;
    if (args[0] == "R1") which = curves::LbProfile::R1;
    else if (args[0] == "R2") which = curves::LbProfile::R2;
    else if (args[0] == "R3") which = curves::LbProfile::R3;
    else throw ConfigError("curve lb: profile must be R1, R2 or R3");
    return curves::LowerBound{which, parse_number(args[1], "lb A"), parse_number(args[2], "lb h")};
  }
  if (name == "tabulated") {
    curves::Tabulated t;
    for (auto knot : args) {
      const auto colon = knot.find(':');
      if (colon == std::string_view::npos)
        throw ConfigError("curve tabulated: knots are price:demand");
      t.prices.push_back(parse_number(knot.substr(0, colon), "tabulated price"));
      t.demands.push_back(parse_number(knot.substr(colon + 1), "tabulated demand"));
    }
    return t;
  }
  throw ConfigError("curve: unknown kind '" + std::string(name) + "'");
}

void InstanceCatalog::add(MarketInstance instance) {
  std::string key = instance.name;
  custom_.insert_or_assign(std::move(key), std::move(instance));
}

bool InstanceCatalog::contains(std::string_view name) const {
  if (custom_.find(name) != custom_.end()) return true;
  for (const auto& n : names()) {
    if (n == name) return true;
  }
  try {
    return lb_pair_from_name(name).has_value();
  } catch (const ConfigError&) {
    return false;
  }
}

MarketInstance InstanceCatalog::get(std::string_view name) const {
  if (auto it = custom_.find(name); it != custom_.end()) return it->second;
  if (name == "exp-paper") return exp_paper_instance();
  if (name == "linear-paper") return linear_paper_instance();
  if (name == "invprop-paper") return invprop_paper_instance();
  if (name == "linear-3group") return linear_three_group_instance();
  if (auto lb = lb_pair_from_name(name)) return *lb;
  throw ConfigError("instance: unknown name '" + std::string(name) + "'");
}

std::vector<std::string> InstanceCatalog::names() const {
  std::vector<std::string> out{"exp-paper", "linear-paper", "invprop-paper", "linear-3group"};
  for (const auto& [name, _] : custom_) out.push_back(name);
  return out;
}

}  // namespace fairprice
