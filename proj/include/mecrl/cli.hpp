// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "mecrl/config.hpp"
#include "mecrl/metrics.hpp"

namespace mecrl {

/// Entry point for the `mecrl` tool: train | compare | validate | replay.
/// Returns the process exit code.
int cli_main(int argc, const char* const* argv);
int cli_main(const std::vector<std::string>& args);

/// Builds the effective configuration: config file (if any), then each
/// --override, then explicit flags. The seed falls back to MECRL_SEED when
/// neither a flag nor the file provides one.
struct CliSettings {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string algo;
  std::string out_dir;
  int episodes = -1;
  bool seed_given = false;
  std::uint64_t seed = 0;
  bool trace = false;
};
RunConfig resolve_config(const CliSettings& settings);

/// Trains one algorithm and writes metrics.csv, config.json, per-user
/// checkpoints and (with trace) trace.csv into cfg.out_dir.
std::vector<EpisodeRecord> run_train(const RunConfig& cfg, std::ostream& log);

struct SeedComparison {
  std::uint64_t seed = 0;
  std::vector<UserComparison> table;
};

/// Trains DDPG then TD3 on each seed (same env streams for both) and writes
/// <out>/seed_<s>/<algo>/metrics.csv plus <out>/summary.txt.
std::vector<SeedComparison> run_compare(const RunConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                        std::ostream& log);

}  // namespace mecrl
