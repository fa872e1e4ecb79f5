// SPDX-License-Identifier: Apache-2.0
//
// Run configuration as a nested JSON document:
//
//   { "algo": "td3", "seed": 1, "episodes": 2000, "out": "out", "trace": false,
//     "tail": 0.25, "channel": {...}, "env": {...}, "agent": {...} }
//
// Parsing is strict: any key that does not name a field is rejected with a
// ConfigError carrying the dotted key path.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mecrl/env.hpp"
#include "mecrl/rl.hpp"

namespace mecrl {

struct RunConfig {
  EnvConfig env;
  AgentConfig agent;
  Algo algo = Algo::td3;
  std::uint64_t seed = 1;
  int episodes = 2000;
  std::string out_dir = "out";
  bool trace = false;
  double tail = 0.25;  // fraction of final episodes summarized by `compare`

  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);

/// Missing keys keep their defaults. When channel.n_users is given without
/// env.lambda, the arrival rates follow the default per-user formula.
RunConfig run_config_from_json(const nlohmann::json& doc);

/// Applies "dotted.key=value" to `doc`. The value is parsed as JSON when
/// possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Reads a JSON config file; throws ConfigError on malformed input.
nlohmann::json read_config_file(const std::string& path);

}  // namespace mecrl
