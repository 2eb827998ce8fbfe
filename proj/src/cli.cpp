#include "fairprice/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "fairprice/config.hpp"
#include "fairprice/lower_bound.hpp"

namespace fairprice {

namespace {

namespace fs = std::filesystem;

struct UsageError : ConfigError {
  using ConfigError::ConfigError;
};

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("FAIRPRICE_SEED");
  if (!raw || !*raw) return std::nullopt;
  char* end = nullptr;
  const auto v = std::strtoull(raw, &end, 10);
  if (*end != '\0') throw UsageError("FAIRPRICE_SEED: not an unsigned integer");
  return v;
}

FairnessMeasure::Kind parse_measure(const std::string& s) {
  if (s == "price") return FairnessMeasure::Kind::Price;
  if (s == "demand") return FairnessMeasure::Kind::Demand;
  throw UsageError("--measure: expected price or demand");
}

std::optional<ConstraintMode> parse_mode(const std::string& s) {
  if (s == "hard") return ConstraintMode::Hard;
  if (s == "soft") return ConstraintMode::Soft;
  if (s == "auto") return std::nullopt;
  throw UsageError("--mode: expected hard, soft or auto");
}

DiscrepancyFunction parse_discrepancy(const std::string& s) {
  if (s == "difference") return DiscrepancyFunction::difference();
  if (s.rfind("log_ratio:", 0) == 0) {
    char* end = nullptr;
    const double eps = std::strtod(s.c_str() + 10, &end);
    if (*end != '\0') throw UsageError("--discrepancy: bad epsilon in '" + s + "'");
    return DiscrepancyFunction::log_ratio(eps);
  }
  throw UsageError("--discrepancy: expected difference or log_ratio:<eps>");
}

// Refuses to clobber existing outputs unless forced.
void prepare_outputs(const fs::path& dir, std::initializer_list<const char*> files, bool force) {
  fs::create_directories(dir);
  if (force) return;
  for (const char* f : files) {
    if (fs::exists(dir / f))
      throw UsageError((dir / f).string() + " exists; pass --force to overwrite");
  }
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunArgs {
  std::string instance = "exp-paper";
  std::string policy;
  double lambda = 1.0;
  std::int64_t T = 100000;
  std::uint64_t seed = 1;
  double gamma = 1.0;
  std::string measure = "price";
  std::string mode = "auto";
  std::string discrepancy = "difference";
  bool full_trace = false;
  std::string out = "run_out";
  bool force = false;
  std::string config;
  double c_trisect = desk_schedule().c_trisect;
  double c_checkpoint = desk_schedule().c_checkpoint;
};

int cmd_run(const RunArgs& a) {
  InstanceCatalog catalog;
  if (!a.config.empty()) catalog = load_sweep_config(a.config).catalog;
  if (!catalog.contains(a.instance)) throw UsageError("--instance: unknown '" + a.instance + "'");
  const auto instance = catalog.get(a.instance);
  const auto policy = parse_policy(a.policy);

  FairnessSpec spec;
  spec.measure = FairnessMeasure::for_instance(parse_measure(a.measure), instance);
  spec.lambda = a.lambda;
  spec.gamma = a.gamma;
  spec.discrepancy = parse_discrepancy(a.discrepancy);
  const auto mode = parse_mode(a.mode);
  spec.mode = mode.value_or(is_soft_policy(policy) ? ConstraintMode::Soft : ConstraintMode::Hard);
  spec.validate();
  check_compatibility(policy, spec, instance);

  ExplorationSchedule schedule = desk_schedule();
  schedule.c_trisect = a.c_trisect;
  schedule.c_checkpoint = a.c_checkpoint;
  schedule.validate();
  if (a.T < 1) throw UsageError("--T: must be >= 1");

  const std::uint64_t seed = env_seed().value_or(a.seed);
  const fs::path dir(a.out);
  prepare_outputs(dir, {"trace.csv", "summary.json"}, a.force);

  TrialOptions options;
  options.full_trace = a.full_trace;
  const auto trace = run_trial(instance, spec, policy, schedule, a.T, seed, options);

  std::ofstream csv(dir / "trace.csv");
  write_trace_csv(csv, trace);
  std::ofstream json(dir / "summary.json");
  json << summary_json(trace).dump(2) << "\n";
  if (!csv || !json) throw std::runtime_error("failed writing outputs to " + dir.string());

  std::cout << "Reg_T=" << trace.summary.regret << " Reg_T_soft=" << trace.summary.penalized_regret
            << " violations=" << trace.summary.violations << "\n";
  return 0;
}

struct SweepArgs {
  std::string config;
  std::string preset;
  bool dry_run = false;
  std::string out;
  unsigned workers = 0;
  bool force = false;
};

int cmd_sweep(const SweepArgs& a) {
  if (a.config.empty() == a.preset.empty())
    throw UsageError("sweep: give exactly one of <config> or --preset");
  LoadedConfig loaded{a.preset.empty() ? SweepConfig{} : sweep_preset(a.preset), {}};
  if (!a.config.empty()) loaded = load_sweep_config(a.config);
  auto& cfg = loaded.sweep;
  if (auto s = env_seed()) cfg.base_seed = *s;
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (a.workers) cfg.workers = a.workers;
  cfg.validate();

  if (a.dry_run) {
    std::cout << "cells=" << cfg.policies.size() * cfg.lambdas.size() * cfg.horizons.size()
              << " trials_per_cell=" << cfg.trials << " total_trials=" << cfg.trial_count() << "\n";
    return 0;
  }
  const fs::path dir(cfg.output_dir);
  prepare_outputs(dir, {"results.csv", "slopes.csv", "manifest.json"}, a.force);
  const auto result = run_sweep(cfg, loaded.catalog);

  std::ofstream results(dir / "results.csv");
  write_results_csv(results, result);
  std::ofstream slopes(dir / "slopes.csv");
  write_slopes_csv(slopes, result);
  std::ofstream manifest(dir / "manifest.json");
  manifest << manifest_json(result, utc_timestamp()).dump(2) << "\n";
  if (!results || !slopes || !manifest)
    throw std::runtime_error("failed writing outputs to " + dir.string());

  bool failed = false;
  for (const auto& row : result.slopes) {
    std::cout << policy_name(row.policy) << " lambda=" << row.lambda;
    if (row.fit) std::cout << " slope=" << row.fit->slope << " r2=" << row.fit->r_squared;
    else std::cout << " slope=n/a (" << row.error << ")";
    std::cout << "\n";
  }
  for (const auto& cell : result.cells) {
    if (!cell.error.empty()) {
      std::cerr << "cell " << policy_name(cell.policy) << " lambda=" << cell.lambda
                << " T=" << cell.horizon << " failed: " << cell.error << "\n";
      failed = true;
    }
  }
  return failed ? 1 : 0;
}

struct OracleArgs {
  std::string instance = "exp-paper";
  double lambda = 1.0;
  std::string measure = "price";
  std::string discrepancy = "difference";
  double tol = 1e-6;
  double grid_step = 1e-3;
  std::string config;
};

int cmd_oracle(const OracleArgs& a) {
  InstanceCatalog catalog;
  if (!a.config.empty()) catalog = load_sweep_config(a.config).catalog;
  if (!catalog.contains(a.instance)) throw UsageError("--instance: unknown '" + a.instance + "'");
  const auto instance = catalog.get(a.instance);
  FairnessSpec spec;
  spec.measure = FairnessMeasure::for_instance(parse_measure(a.measure), instance);
  spec.lambda = a.lambda;
  spec.discrepancy = parse_discrepancy(a.discrepancy);
  spec.validate();
  OracleOptions options;
  options.tol = a.tol;
  options.grid_step = a.grid_step;
  std::cout << solution_json(solve_clairvoyant(instance, spec, options)).dump(2) << "\n";
  return 0;
}

int cmd_verify_lb(double A, double h, double step) {
  const auto report = verify_lb_properties(A, h, step);
  std::cout << report.format();
  return report.all_passed() ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"fairprice: fairness-aware dynamic pricing simulator"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "simulate one trial and write trace.csv + summary.json");
  run_cmd->add_option("--instance", run.instance, "instance name");
  run_cmd->add_option("--policy", run.policy, "policy name")->required();
  run_cmd->add_option("--lambda", run.lambda, "fairness level in [0, 1]");
  run_cmd->add_option("--T", run.T, "selling horizon");
  run_cmd->add_option("--seed", run.seed, "trial seed (FAIRPRICE_SEED overrides)");
  run_cmd->add_option("--gamma", run.gamma, "soft-constraint penalty weight");
  run_cmd->add_option("--measure", run.measure, "price | demand");
  run_cmd->add_option("--mode", run.mode, "hard | soft | auto (inferred from the policy)");
  run_cmd->add_option("--discrepancy", run.discrepancy, "difference | log_ratio:<eps>");
  run_cmd->add_option("--c-trisect", run.c_trisect, "Stage I count multiplier");
  run_cmd->add_option("--c-checkpoint", run.c_checkpoint, "Stage II count multiplier");
  run_cmd->add_option("--config", run.config, "config file providing custom instances");
  run_cmd->add_flag("--full-trace", run.full_trace, "record every period");
  run_cmd->add_option("--out", run.out, "output directory");
  run_cmd->add_flag("--force", run.force, "overwrite existing outputs");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "run a (policy, lambda, T) sweep from a config file");
  sweep_cmd->add_option("config", sweep.config, "INI sweep config");
  sweep_cmd->add_option("--preset", sweep.preset, "named preset instead of a config file");
  sweep_cmd->add_flag("--dry-run", sweep.dry_run, "print the trial count and exit");
  sweep_cmd->add_option("--out", sweep.out, "override the output directory");
  sweep_cmd->add_option("--workers", sweep.workers, "worker threads, 0 = logical cores");
  sweep_cmd->add_flag("--force", sweep.force, "overwrite existing outputs");

  OracleArgs oracle;
  auto* oracle_cmd = app.add_subcommand("oracle", "print the clairvoyant solution as JSON");
  oracle_cmd->add_option("--instance", oracle.instance, "instance name");
  oracle_cmd->add_option("--lambda", oracle.lambda, "fairness level in [0, 1]");
  oracle_cmd->add_option("--measure", oracle.measure, "price | demand");
  oracle_cmd->add_option("--discrepancy", oracle.discrepancy, "difference | log_ratio:<eps>");
  oracle_cmd->add_option("--tol", oracle.tol, "1-D solver tolerance");
  oracle_cmd->add_option("--grid-step", oracle.grid_step, "brute-force grid step");
  oracle_cmd->add_option("--config", oracle.config, "config file providing custom instances");

  double lb_A = 20.0, lb_h = 0.005, lb_step = 1e-4;
  auto* lb_cmd = app.add_subcommand("verify-lb", "check the hard-instance properties (a)-(f)");
  lb_cmd->set_help_flag("--help", "print this help message and exit");
  lb_cmd->add_option("--A", lb_A, "curvature parameter, 20 <= A <= 30");
  lb_cmd->add_option("--h", lb_h, "separation parameter, 0 < h < 0.01");
  lb_cmd->add_option("--step", lb_step, "grid step, <= 1e-4");

  auto* schema_cmd = app.add_subcommand("schema", "list every config key with type and default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*sweep_cmd) return cmd_sweep(sweep);
    if (*oracle_cmd) return cmd_oracle(oracle);
    if (*lb_cmd) return cmd_verify_lb(lb_A, lb_h, lb_step);
    if (*schema_cmd) {
      for (const auto& line : config_schema()) std::cout << line << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace fairprice
