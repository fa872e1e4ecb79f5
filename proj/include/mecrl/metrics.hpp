// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mecrl/rl.hpp"

namespace mecrl {

inline constexpr const char* kMetricsHeader = "episode,user,algo,seed,avg_reward,avg_power_w,avg_delay_kbit";

/// One row per record ordered by (episode, user); floats at 6 significant digits.
void write_metrics(std::ostream& out, std::span<const EpisodeRecord> records);
void write_metrics(const std::string& path, std::span<const EpisodeRecord> records);

std::vector<EpisodeRecord> read_metrics(const std::string& path);

/// Per-step trace rows (--trace): episode,step,user,p_l,p_o,reward,buffer_bits,d_l,d_o,arrival,gamma,phi.
class TraceWriter {
 public:
  explicit TraceWriter(const std::string& path);
  void write(const StepTrace& row);

 private:
  std::ofstream out_;
};

enum class Winner { none, ddpg, td3 };

struct UserSummary {
  int user = 0;
  double reward = 0.0;
  double power = 0.0;
  double delay = 0.0;
};

struct UserComparison {
  int user = 0;
  UserSummary ddpg;
  UserSummary td3;
  Winner reward = Winner::none;  // higher wins
  Winner power = Winner::none;   // lower wins
  Winner delay = Winner::none;   // lower wins
};

/// Per-user means over the last ceil(tail * episodes) episodes.
std::vector<UserSummary> tail_means(std::span<const EpisodeRecord> records, double tail);

/// Throws std::invalid_argument when the two runs cover different episode
/// counts or user sets.
std::vector<UserComparison> summarize(std::span<const EpisodeRecord> ddpg, std::span<const EpisodeRecord> td3,
                                      double tail);

/// Results grid: one row per user, DDPG | TD3 per metric, winner starred.
std::string format_comparison(const std::vector<UserComparison>& table);

}  // namespace mecrl
