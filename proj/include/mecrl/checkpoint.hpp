// SPDX-License-Identifier: Apache-2.0
//
// Agent checkpoints. Layout, all integers and floats little-endian:
//
//   "MECRL1"                      6 bytes
//   u8  tag_len, tag_len bytes    algorithm tag, "ddpg" or "td3"
//   u32 network_count
//   per network:  u32 dim_count, dim_count x u32 layer dims
//   per network, per layer: weights row-major (out x in) as f64, then biases as f64
//
// Networks are stored as actor, critic 1[, critic 2], actor target,
// critic target 1[, critic target 2]. Optimizer state is not saved.

#pragma once

#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "mecrl/rl.hpp"

namespace mecrl {

inline constexpr char kCheckpointMagic[] = "MECRL1";

void save_checkpoint(std::ostream& out, const Agent& agent);
void save_checkpoint(const Agent& agent, const std::string& path);

/// Action bounds are not part of the file; they come from the env config.
/// Throws CorruptCheckpointError on a bad magic, tag, dims or short read.
Agent load_checkpoint(std::istream& in, const Eigen::VectorXd& action_high, const AgentConfig& cfg);
Agent load_checkpoint(const std::string& path, const Eigen::VectorXd& action_high, const AgentConfig& cfg);

}  // namespace mecrl
