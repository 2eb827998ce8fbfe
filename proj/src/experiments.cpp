#include "fairprice/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

namespace fairprice {

namespace {

std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

FairnessSpec spec_for(const SweepConfig& config, const MarketInstance& instance, double lambda) {
  FairnessSpec spec;
  spec.measure = FairnessMeasure::for_instance(config.measure, instance);
  spec.lambda = lambda;
  spec.mode = config.resolved_mode();
  spec.gamma = config.gamma;
  return spec;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t cell, std::uint64_t trial) {
  return splitmix64(splitmix64(splitmix64(base) ^ cell) ^ trial);
}

std::uint64_t cell_id(PolicyId policy, double lambda, std::int64_t horizon) {
  std::ostringstream key;
  key << "policy=" << policy_name(policy) << ";lambda=" << fmt_double(lambda) << ";T=" << horizon;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : key.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ConstraintMode SweepConfig::resolved_mode() const {
  if (mode) return *mode;
  for (auto p : policies) {
    if (is_soft_policy(p)) return ConstraintMode::Soft;
  }
  return ConstraintMode::Hard;
}

std::vector<std::string> SweepConfig::violations() const {
  std::vector<std::string> out;
  if (instance.empty()) out.push_back("sweep.instance: must not be empty");
  if (policies.empty()) out.push_back("sweep.policies: at least one policy is required");
  if (lambdas.empty()) out.push_back("sweep.lambdas: at least one value is required");
  for (double l : lambdas) {
    if (!(l >= 0.0 && l <= 1.0)) out.push_back("sweep.lambdas: " + fmt_double(l) + " outside [0, 1]");
  }
  if (horizons.empty()) out.push_back("sweep.horizons: at least one value is required");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] < 1) out.push_back("sweep.horizons: values must be >= 1");
    if (i > 0 && horizons[i] <= horizons[i - 1])
      out.push_back("sweep.horizons: values must be strictly increasing");
  }
  if (trials < 1) out.push_back("sweep.trials: must be >= 1");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) out.push_back("fairness.gamma: must be >= 0");
  if (output_dir.empty()) out.push_back("sweep.output_dir: must not be empty");
  try {
    schedule.validate();
  } catch (const ConfigError& e) {
    out.push_back(e.what());
  }
  const auto m = resolved_mode();
  for (auto p : policies) {
    if (is_baseline(p) || is_diagnostic(p)) continue;
    if (is_soft_policy(p) != (m == ConstraintMode::Soft)) {
      out.push_back("fairness.mode: policy " + std::string(policy_name(p)) + " cannot run in " +
                    to_string(m) + " mode");
    }
  }
  return out;
}

void SweepConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::string msg;
  for (const auto& line : v) msg += (msg.empty() ? "" : "\n") + line;
  throw ConfigError(msg);
}

std::size_t SweepConfig::trial_count() const {
  return policies.size() * lambdas.size() * horizons.size() * static_cast<std::size_t>(trials);
}

SlopeFit fit_slope(std::span<const std::pair<double, double>> samples) {
  SlopeFit fit;
  for (const auto& [T, regret] : samples) {
    if (regret > 0.0 && T > 0.0) fit.points.emplace_back(std::log(T), std::log(regret));
    else fit.dropped.push_back(T);
  }
  if (fit.points.size() < 3) {
    std::ostringstream msg;
    msg << "fit_slope: need >= 3 positive points, have " << fit.points.size();
    throw ConfigError(msg.str());
  }
  const double n = static_cast<double>(fit.points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : fit.points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : fit.points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (!(sxx > 0.0)) throw ConfigError("fit_slope: T values must differ");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& [x, y] : fit.points) {
    const double r = y - (fit.intercept + fit.slope * x);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

CellResult aggregate_cell(PolicyId policy, double lambda, std::int64_t horizon,
                          std::span<const TrialStats> trials) {
  CellResult cell;
  cell.policy = policy;
  cell.lambda = lambda;
  cell.horizon = horizon;
  cell.trials = static_cast<int>(trials.size());
  cell.cell = cell_id(policy, lambda, horizon);
  if (trials.empty()) return cell;
  const double n = static_cast<double>(trials.size());
  double sum = 0.0, sum_pen = 0.0;
  std::int64_t hit = 0, violating = 0, periods = 0;
  for (const auto& t : trials) {
    sum += t.regret;
    sum_pen += t.penalized_regret;
    if (t.violations > 0) ++hit;
    violating += t.violations;
    periods += t.horizon;
  }
  cell.mean_regret = sum / n;
  cell.mean_penalized_regret = sum_pen / n;
  double ss = 0.0, ss_pen = 0.0;
  for (const auto& t : trials) {
    ss += (t.regret - cell.mean_regret) * (t.regret - cell.mean_regret);
    ss_pen += (t.penalized_regret - cell.mean_penalized_regret) *
              (t.penalized_regret - cell.mean_penalized_regret);
  }
  cell.std_regret = trials.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  cell.std_penalized_regret = trials.size() > 1 ? std::sqrt(ss_pen / (n - 1.0)) : 0.0;
  cell.stderr_regret = cell.std_regret / std::sqrt(n);
  cell.violation_trial_frac = static_cast<double>(hit) / n;
  cell.violation_period_frac =
      periods > 0 ? static_cast<double>(violating) / static_cast<double>(periods) : 0.0;
  return cell;
}

const CellResult& SweepResult::cell(PolicyId policy, double lambda, std::int64_t horizon) const {
  for (const auto& c : cells) {
    if (c.policy == policy && c.lambda == lambda && c.horizon == horizon) return c;
  }
  throw ConfigError("sweep result: no such cell");
}

const SlopeRow& SweepResult::slope(PolicyId policy, double lambda) const {
  for (const auto& s : slopes) {
    if (s.policy == policy && s.lambda == lambda) return s;
  }
  throw ConfigError("sweep result: no such slope row");
}

SweepResult run_sweep(const SweepConfig& config, const InstanceCatalog& catalog) {
  config.validate();
  const MarketInstance instance = catalog.get(config.instance);

  SweepResult result;
  result.config = config;
  std::vector<FairnessSpec> specs;
  for (double lambda : config.lambdas) {
    specs.push_back(spec_for(config, instance, lambda));
    for (auto p : config.policies) check_compatibility(p, specs.back(), instance);
  }
  for (const auto& spec : specs) result.oracles.push_back(solve_clairvoyant(instance, spec));

  struct CellKey {
    PolicyId policy;
    std::size_t lambda_idx;
    std::int64_t horizon;
  };
  std::vector<CellKey> keys;
  for (auto p : config.policies)
    for (std::size_t l = 0; l < config.lambdas.size(); ++l)
      for (auto T : config.horizons) keys.push_back({p, l, T});

  const auto trials = static_cast<std::size_t>(config.trials);
  const std::size_t total = keys.size() * trials;
  std::vector<TrialStats> stats(total);
  std::vector<std::string> errors(total);
  std::vector<std::uint64_t> seeds(total);
  for (std::size_t c = 0; c < keys.size(); ++c) {
    const auto id = cell_id(keys[c].policy, config.lambdas[keys[c].lambda_idx], keys[c].horizon);
    for (std::size_t t = 0; t < trials; ++t) seeds[c * trials + t] = mix_seed(config.base_seed, id, t);
  }

  TrialOptions options;
  options.sample_every = std::numeric_limits<std::int64_t>::max();
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t task = next++; task < total; task = next++) {
      const auto& key = keys[task / trials];
      try {
        const auto trace =
            run_trial(instance, specs[key.lambda_idx], key.policy, config.schedule, key.horizon,
                      seeds[task], result.oracles[key.lambda_idx], options);
        stats[task] = {trace.summary.regret, trace.summary.penalized_regret,
                       trace.summary.violations, trace.horizon};
      } catch (const std::exception& e) {
        errors[task] = e.what();
      }
    }
  };
  unsigned workers = config.workers ? config.workers : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(total, 1))));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (std::size_t c = 0; c < keys.size(); ++c) {
    const auto& key = keys[c];
    const double lambda = config.lambdas[key.lambda_idx];
    std::span<const TrialStats> cell_stats(stats.data() + c * trials, trials);
    CellResult cell = aggregate_cell(key.policy, lambda, key.horizon, cell_stats);
    cell.seeds.assign(seeds.begin() + static_cast<std::ptrdiff_t>(c * trials),
                      seeds.begin() + static_cast<std::ptrdiff_t>((c + 1) * trials));
    for (std::size_t t = 0; t < trials; ++t) {
      if (!errors[c * trials + t].empty()) {
        std::ostringstream msg;
        msg << "trial " << t << ": " << errors[c * trials + t];
        cell.error = msg.str();
        cell.mean_regret = cell.std_regret = cell.stderr_regret = NAN;
        cell.mean_penalized_regret = cell.std_penalized_regret = NAN;
        break;
      }
    }
    result.cells.push_back(std::move(cell));
  }

  const bool penalized = config.resolved_mode() == ConstraintMode::Soft;
  for (auto p : config.policies) {
    for (double lambda : config.lambdas) {
      SlopeRow row;
      row.policy = p;
      row.lambda = lambda;
      row.penalized = penalized;
      std::vector<std::pair<double, double>> samples;
      for (auto T : config.horizons) {
        const auto& c = result.cell(p, lambda, T);
        if (!c.error.empty()) {
          row.error = "cell T=" + std::to_string(T) + " failed";
          break;
        }
        samples.emplace_back(static_cast<double>(T),
                             penalized ? c.mean_penalized_regret : c.mean_regret);
      }
      if (row.error.empty()) {
        try {
          row.fit = fit_slope(samples);
        } catch (const ConfigError& e) {
          row.error = e.what();
        }
      }
      result.slopes.push_back(std::move(row));
    }
  }
  return result;
}

void write_results_csv(std::ostream& out, const SweepResult& result) {
  out << "policy,instance,lambda,T,trials,mean_regret,std_regret,stderr,mean_penalized_regret,"
         "violation_trial_frac,std_penalized_regret,violation_period_frac,error\n";
  for (const auto& c : result.cells) {
    out << policy_name(c.policy) << "," << csv_field(result.config.instance) << ","
        << fmt_double(c.lambda) << "," << c.horizon << "," << c.trials << ","
        << fmt_double(c.mean_regret) << "," << fmt_double(c.std_regret) << ","
        << fmt_double(c.stderr_regret) << "," << fmt_double(c.mean_penalized_regret) << ","
        << fmt_double(c.violation_trial_frac) << "," << fmt_double(c.std_penalized_regret) << ","
        << fmt_double(c.violation_period_frac) << "," << csv_field(c.error) << "\n";
  }
}

void write_slopes_csv(std::ostream& out, const SweepResult& result) {
  out << "policy,instance,lambda,slope,intercept,r2,penalized,points,error\n";
  for (const auto& s : result.slopes) {
    out << policy_name(s.policy) << "," << csv_field(result.config.instance) << ","
        << fmt_double(s.lambda) << ",";
    if (s.fit) {
      out << fmt_double(s.fit->slope) << "," << fmt_double(s.fit->intercept) << ","
          << fmt_double(s.fit->r_squared);
    } else {
      out << ",,";
    }
    out << "," << (s.penalized ? 1 : 0) << "," << (s.fit ? s.fit->points.size() : 0) << ","
        << csv_field(s.error) << "\n";
  }
}

nlohmann::json manifest_json(const SweepResult& result, const std::string& timestamp) {
  const auto& c = result.config;
  nlohmann::json policies = nlohmann::json::array();
  for (auto p : c.policies) policies.push_back(std::string(policy_name(p)));
  const auto& s = c.schedule;
  nlohmann::json schedule{
      {"c_trisect", s.c_trisect},
      {"c_checkpoint", s.c_checkpoint},
      {"trisect_stop_width", s.trisect_stop_width ? nlohmann::json(*s.trisect_stop_width) : nlohmann::json("4*T^-0.2")},
      {"xi_slack", s.xi_slack ? nlohmann::json(*s.xi_slack) : nlohmann::json("8*T^-0.2")},
      {"checkpoint_count_scale", s.checkpoint_count_scale},
      {"K", s.K},
      {"C", s.C},
      {"K_prime", s.K_prime},
      {"M_bar", s.M_bar},
      {"c_baseline", s.c_baseline},
  };
  nlohmann::json oracles = nlohmann::json::array();
  for (const auto& o : result.oracles) oracles.push_back(solution_json(o));
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& cell : result.cells) {
    cells.push_back({{"policy", std::string(policy_name(cell.policy))},
                     {"lambda", cell.lambda},
                     {"T", cell.horizon},
                     {"cell_id", cell.cell},
                     {"seeds", cell.seeds},
                     {"error", cell.error}});
  }
  return nlohmann::json{
      {"config",
       {{"instance", c.instance},
        {"policies", policies},
        {"lambdas", c.lambdas},
        {"horizons", c.horizons},
        {"trials", c.trials},
        {"base_seed", c.base_seed},
        {"measure", to_string(c.measure)},
        {"mode", to_string(c.resolved_mode())},
        {"gamma", c.gamma},
        {"schedule", schedule}}},
      {"seed_mixing",
       "seed = splitmix64(splitmix64(splitmix64(base) ^ cell_id) ^ trial); cell_id = FNV-1a64 of "
       "\"policy=<name>;lambda=<%.17g>;T=<T>\"; splitmix64(x): z = x + 0x9E3779B97F4A7C15, "
       "z = (z ^ z>>30) * 0xBF58476D1CE4E5B9, z = (z ^ z>>27) * 0x94D049BB133111EB, z ^ z>>31"},
      {"oracles", oracles},
      {"cells", cells},
      {"timestamp", timestamp},
  };
}

ExplorationSchedule desk_schedule() {
  ExplorationSchedule s;
  s.c_trisect = 2e-5;
  s.c_checkpoint = 0.05;
  s.c_baseline = 3.0;
  return s;
}

std::vector<std::string> sweep_preset_names() {
  return {"desk-scale-fig1", "desk-scale-fig2", "desk-scale-linear", "desk-scale-invprop",
          "paper-scale"};
}

SweepConfig sweep_preset(std::string_view name) {
  SweepConfig c;
  c.policies = {PolicyId::FdpDl, PolicyId::BaselineTrisect, PolicyId::BaselineEtc};
  c.lambdas = {0.0, 0.2, 0.5, 0.8, 1.0};
  c.horizons = {20000, 50000, 100000, 200000};
  c.trials = 50;
  c.schedule = desk_schedule();
  c.output_dir = "out/" + std::string(name);
  if (name == "desk-scale-fig1") {
    c.instance = "exp-paper";
  } else if (name == "desk-scale-fig2") {
    c.instance = "exp-paper";
    c.policies = {PolicyId::FdpGfm, PolicyId::BaselineTrisect, PolicyId::BaselineEtc};
    c.measure = FairnessMeasure::Kind::Demand;
    c.mode = ConstraintMode::Soft;
    c.gamma = 1.0;
  } else if (name == "desk-scale-linear") {
    c.instance = "linear-paper";
  } else if (name == "desk-scale-invprop") {
    c.instance = "invprop-paper";
  } else if (name == "paper-scale") {
    c.instance = "exp-paper";
    c.horizons = {100000, 200000, 500000, 1000000};
    c.trials = 1000;
  } else {
    throw ConfigError("preset: unknown name '" + std::string(name) + "'");
  }
  return c;
}

}  // namespace fairprice
