#include "fairprice/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fairprice {

namespace {

namespace pt = boost::property_tree;

struct KeySpec {
  const char* section;
  const char* key;
  const char* type;
  const char* fallback;
  const char* help;
};

constexpr KeySpec kSchema[] = {
    {"sweep", "preset", "string", "(none)", "seed every key from a named preset"},
    {"sweep", "instance", "string", "exp-paper", "built-in or [instance.<name>] instance"},
    {"sweep", "policies", "list<string>", "(required)", "policy names"},
    {"sweep", "lambdas", "list<real>", "0,0.2,0.5,0.8,1", "fairness levels in [0, 1]"},
    {"sweep", "horizons", "list<int>", "20000,50000,100000,200000", "strictly increasing T grid"},
    {"sweep", "trials", "int", "50", "trials per cell"},
    {"sweep", "seed", "uint64", "1", "base seed (FAIRPRICE_SEED overrides)"},
    {"sweep", "workers", "int", "0", "worker threads, 0 = logical cores"},
    {"sweep", "output_dir", "string", "sweep_out", "directory for results"},
    {"fairness", "measure", "price|demand", "price", "fairness measure"},
    {"fairness", "mode", "hard|soft|auto", "auto", "auto: soft iff a soft policy is listed"},
    {"fairness", "gamma", "real", "1", "soft-constraint penalty weight"},
    {"schedule", "c_trisect", "real", "2e-05", "Stage I count multiplier"},
    {"schedule", "c_checkpoint", "real", "0.05", "Stage II count multiplier"},
    {"schedule", "trisect_stop_width", "real", "4*T^-0.2", "Stage I stopping width"},
    {"schedule", "xi_slack", "real", "8*T^-0.2", "slack subtracted from the estimated gap"},
    {"schedule", "checkpoint_count_scale", "real", "1", "J = ceil(scale (pmax - pmin) T^0.2)"},
    {"schedule", "K", "real", "1", "demand Lipschitz constant"},
    {"schedule", "C", "real", "1", "revenue concavity constant"},
    {"schedule", "K_prime", "real", "1", "measure Lipschitz constant"},
    {"schedule", "M_bar", "real", "1", "measure observation bound"},
    {"schedule", "c_baseline", "real", "3", "same-price trisection count multiplier"},
    {"instance.<name>", "domain", "real,real", "(required)", "price interval lo, hi"},
    {"instance.<name>", "cost", "real", "0", "marginal cost"},
    {"instance.<name>", "noise", "bernoulli|truncated:<sigma>", "bernoulli", "demand noise"},
    {"instance.<name>", "curve.<i>", "curve", "(required, i = 1..N)", "curve spec"},
};

bool known_key(const std::string& section, const std::string& key) {
  for (const auto& k : kSchema) {
    if (section == k.section && key == k.key) return true;
  }
  return false;
}

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
bool parse_value(const std::string& text, T& out) {
  const auto s = trim(text);
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return !s.empty() && ec == std::errc() && ptr == end;
}

// Collects every problem instead of stopping at the first.
class Reader {
 public:
  std::vector<std::string> errors;

  template <class T>
  void number(const std::string& where, const std::string& text, T& out) {
    if (!parse_value(text, out)) errors.push_back(where + ": cannot parse '" + text + "'");
  }

  template <class T>
  void list(const std::string& where, const std::string& text, std::vector<T>& out) {
    out.clear();
    for (const auto& item : split_list(text)) {
      T v{};
      if (parse_value(item, v)) out.push_back(v);
      else errors.push_back(where + ": cannot parse list item '" + item + "'");
    }
  }
};

void read_instance(const std::string& name, const pt::ptree& section, Reader& r,
                   InstanceCatalog& catalog) {
  const std::string where = "instance." + name;
  std::optional<PriceInterval> domain;
  double cost = 0.0;
  NoiseModel noise = NoiseModel::bernoulli();
  std::map<int, std::string> curve_specs;
  for (const auto& [key, node] : section) {
    const auto value = node.data();
    if (key == "domain") {
      std::vector<double> ends;
      r.list(where + ".domain", value, ends);
      if (ends.size() != 2) {
        r.errors.push_back(where + ".domain: expected 'lo, hi'");
        continue;
      }
      try {
        domain = PriceInterval(ends[0], ends[1]);
      } catch (const ConfigError& e) {
        r.errors.push_back(where + ".domain: " + e.what());
      }
    } else if (key == "cost") {
      r.number(where + ".cost", value, cost);
    } else if (key == "noise") {
      const auto v = trim(value);
      if (v == "bernoulli") {
        noise = NoiseModel::bernoulli();
      } else if (v.rfind("truncated:", 0) == 0) {
        double sigma = 0.0;
        r.number(where + ".noise", v.substr(10), sigma);
        try {
          noise = NoiseModel::truncated_additive(sigma);
        } catch (const ConfigError& e) {
          r.errors.push_back(where + ".noise: " + e.what());
        }
      } else {
        r.errors.push_back(where + ".noise: expected bernoulli or truncated:<sigma>");
      }
    } else if (key.rfind("curve.", 0) == 0) {
      int idx = 0;
      if (!parse_value(key.substr(6), idx) || idx < 1) {
        r.errors.push_back(where + "." + key + ": curve index must be a positive integer");
        continue;
      }
      curve_specs[idx] = value;
    } else {
      r.errors.push_back(where + "." + key + ": unknown key");
    }
  }
  if (!domain) {
    r.errors.push_back(where + ".domain: required");
    return;
  }
  std::vector<DemandCurve> curves;
  int expected = 1;
  bool ok = true;
  for (const auto& [idx, text] : curve_specs) {
    if (idx != expected++) {
      r.errors.push_back(where + ": curve indices must run 1..N without gaps");
      ok = false;
      break;
    }
    try {
      curves.emplace_back(parse_curve_kind(text), *domain, cost);
    } catch (const ConfigError& e) {
      r.errors.push_back(where + ".curve." + std::to_string(idx) + ": " + e.what());
      ok = false;
    }
  }
  if (!ok) return;
  if (curves.size() < 2) {
    r.errors.push_back(where + ": at least curve.1 and curve.2 are required");
    return;
  }
  try {
    catalog.add(MarketInstance(name, std::move(curves), noise));
  } catch (const ConfigError& e) {
    r.errors.push_back(where + ": " + e.what());
  }
}

SweepConfig default_config() {
  SweepConfig c;
  c.lambdas = {0.0, 0.2, 0.5, 0.8, 1.0};
  c.horizons = {20000, 50000, 100000, 200000};
  c.trials = 50;
  c.schedule = desk_schedule();
  return c;
}

}  // namespace

std::vector<std::string> config_schema() {
  std::vector<std::string> out;
  for (const auto& k : kSchema) {
    std::ostringstream line;
    line << k.section << "." << k.key << "  <" << k.type << ">  default=" << k.fallback << "  "
         << k.help;
    out.push_back(line.str());
  }
  return out;
}

LoadedConfig parse_sweep_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    std::ostringstream msg;
    msg << "config line " << e.line() << ": " << e.message();
    throw ConfigError(msg.str());
  }

  Reader r;
  LoadedConfig loaded{default_config(), InstanceCatalog{}};
  SweepConfig& c = loaded.sweep;

  const std::set<std::string> sections{"sweep", "fairness", "schedule"};
  for (const auto& [name, node] : tree) {
    if (name.rfind("instance.", 0) == 0) continue;
    if (!sections.count(name)) {
      r.errors.push_back(node.empty() ? name + ": keys must sit inside a section"
                                      : name + ": unknown section");
    }
  }

  if (auto sweep = tree.get_child_optional("sweep")) {
    if (auto preset = sweep->get_optional<std::string>("preset")) {
      try {
        c = sweep_preset(trim(*preset));
      } catch (const ConfigError& e) {
        r.errors.push_back(std::string("sweep.preset: ") + e.what());
      }
    }
  }

  for (const auto& [section, node] : tree) {
    if (!sections.count(section)) continue;
    for (const auto& [key, child] : node) {
      const std::string where = section + "." + key;
      const std::string value = trim(child.data());
      if (!known_key(section, key)) {
        r.errors.push_back(where + ": unknown key");
        continue;
      }
      if (section == "sweep") {
        if (key == "preset") {
          continue;
        } else if (key == "instance") {
          c.instance = value;
        } else if (key == "policies") {
          c.policies.clear();
          for (const auto& name : split_list(value)) {
            try {
              c.policies.push_back(parse_policy(name));
            } catch (const ConfigError& e) {
              r.errors.push_back(where + ": " + e.what());
            }
          }
        } else if (key == "lambdas") {
          r.list(where, value, c.lambdas);
        } else if (key == "horizons") {
          r.list(where, value, c.horizons);
        } else if (key == "trials") {
          r.number(where, value, c.trials);
        } else if (key == "seed") {
          r.number(where, value, c.base_seed);
        } else if (key == "workers") {
          r.number(where, value, c.workers);
        } else if (key == "output_dir") {
          c.output_dir = value;
        }
      } else if (section == "fairness") {
        if (key == "measure") {
          if (value == "price") c.measure = FairnessMeasure::Kind::Price;
          else if (value == "demand") c.measure = FairnessMeasure::Kind::Demand;
          else r.errors.push_back(where + ": expected price or demand");
        } else if (key == "mode") {
          if (value == "hard") c.mode = ConstraintMode::Hard;
          else if (value == "soft") c.mode = ConstraintMode::Soft;
          else if (value == "auto") c.mode.reset();
          else r.errors.push_back(where + ": expected hard, soft or auto");
        } else if (key == "gamma") {
          r.number(where, value, c.gamma);
        }
      } else {
        auto& s = c.schedule;
        double v = 0.0;
        r.number(where, value, v);
        if (key == "c_trisect") s.c_trisect = v;
        else if (key == "c_checkpoint") s.c_checkpoint = v;
        else if (key == "trisect_stop_width") s.trisect_stop_width = v;
        else if (key == "xi_slack") s.xi_slack = v;
        else if (key == "checkpoint_count_scale") s.checkpoint_count_scale = v;
        else if (key == "K") s.K = v;
        else if (key == "C") s.C = v;
        else if (key == "K_prime") s.K_prime = v;
        else if (key == "M_bar") s.M_bar = v;
        else if (key == "c_baseline") s.c_baseline = v;
      }
    }
  }

  for (const auto& [name, node] : tree) {
    if (name.rfind("instance.", 0) == 0) read_instance(name.substr(9), node, r, loaded.catalog);
  }

  for (auto& v : c.violations()) r.errors.push_back(std::move(v));
  if (!c.instance.empty() && !loaded.catalog.contains(c.instance))
    r.errors.push_back("sweep.instance: unknown instance '" + c.instance + "'");

  if (!r.errors.empty()) {
    std::string msg;
    for (const auto& e : r.errors) msg += (msg.empty() ? "" : "\n") + e;
    throw ConfigError(msg);
  }
  return loaded;
}

LoadedConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_sweep_config(buf.str());
}

}  // namespace fairprice
