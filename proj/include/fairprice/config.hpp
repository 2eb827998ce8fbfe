#pragma once

#include <string>
#include <vector>

#include "fairprice/catalog.hpp"
#include "fairprice/experiments.hpp"

namespace fairprice {

/// Sweep config file grammar (INI-style, one `key = value` per line):
///
///   # comment            ; comment
///   [sweep]              instance, policies, lambdas, horizons, trials, seed,
///                        workers, output_dir, preset
///   [fairness]           measure (price|demand), mode (hard|soft|auto), gamma
///   [schedule]           c_trisect, c_checkpoint, trisect_stop_width, xi_slack,
///                        checkpoint_count_scale, K, C, K_prime, M_bar, c_baseline
///   [instance.<name>]    domain = lo, hi; cost; noise (bernoulli | truncated:<sigma>);
///                        curve.1 .. curve.N = <curve spec, see parse_curve_kind>
///
/// Lists are comma separated. A `preset` key seeds every other key from the
/// named preset before the file's values are applied.
struct LoadedConfig {
  SweepConfig sweep;
  InstanceCatalog catalog;
};

/// Parses and validates; throws ConfigError listing every violation, one per line.
LoadedConfig load_sweep_config(const std::string& path);
LoadedConfig parse_sweep_config(const std::string& text);

/// Keys accepted by the parser, "section.key" with type and default.
std::vector<std::string> config_schema();

}  // namespace fairprice
