// SPDX-License-Identifier: Apache-2.0
//
// Multi-user MEC uplink: Poisson task arrivals into per-user bit buffers,
// DVFS local execution, ZF-limited offloading and the power/delay reward.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mecrl/channel.hpp"

namespace mecrl {

struct EnvConfig {
  ChannelParams channel;
  std::vector<double> lambda{1.1e6, 1.0e6, 0.9e6};  // bits/s per user
  double p_l_max = 2.0;  // W
  double p_o_max = 2.0;  // W
  double kappa = 1e-27;  // effective switched capacitance
  double cycles_per_bit = 500.0;
  double bandwidth = 1e6;  // Hz
  double w = 0.8;          // balance factor; w1 = 10 w, w2 = 1 - w
  int t_max = 200;
  double base_distance = 100.0;  // m

  double w1() const { return 10.0 * w; }
  double w2() const { return 1.0 - w; }
  int n_users() const { return channel.n_users; }
  /// Length of encode_state's output, 2N + 2.
  int state_dim() const { return 2 * channel.n_antennas + 2; }

  void validate() const;
};

/// Default per-user arrival rate in bits/s for 1-based user m: (1.2 - 0.1 m) Mbps.
double default_arrival_rate(int user);

struct UserState {
  double buffer_bits = 0.0;
  double phi_prev = 1.0;
  UserChannel channel;
};

struct PowerAction {
  double p_l = 0.0;
  double p_o = 0.0;

  /// Clips both powers into [0, P_l] x [0, P_o].
  static PowerAction clipped(double p_l, double p_o, const EnvConfig& cfg);
};

struct StepMetrics {
  double reward = 0.0;
  double power_total = 0.0;
  double buffer_bits = 0.0;  // B(t), the start-of-slot backlog the reward charges
  double d_l = 0.0;
  double d_o = 0.0;
  double arrival = 0.0;
  double gamma = 0.0;
  double phi = 0.0;
};

struct StepResult {
  std::vector<UserState> next;
  std::vector<StepMetrics> metrics;
  bool done = false;
};

/// Bits processed locally in one slot: tau0 (p_l / kappa)^{1/3} / L.
double local_bits(double p_l, const EnvConfig& cfg);

/// CPU frequency (Hz) reached at local power p_l.
double cpu_frequency(double p_l, double kappa);

/// Bits offloaded in one slot: tau0 W log2(1 + gamma).
double offload_bits(double gamma, const EnvConfig& cfg);

/// max(B - d_l - d_o, 0) + a.
double update_buffer(double buffer, double d_l, double d_o, double arrival);

/// Poisson draw with mean lambda * tau0 bits.
double sample_arrival(double lambda, double tau0, Rng& rng);

/// -w1 (p_l + p_o) - w2 B / 1000, with B in bits.
double reward(const PowerAction& action, double buffer_bits, const EnvConfig& cfg);

/// Features [B / (100 lambda tau0), phi_prev, Re(h) / s, Im(h) / s] where
/// s = sqrt(h0 (d0 / base_distance)^alpha).
Eigen::VectorXd encode_state(const UserState& s, double lambda, const EnvConfig& cfg);

/// Empty buffers, phi_prev = 1, fresh channels at the base distance. Each
/// user's draws come from that user's own stream.
std::vector<UserState> env_reset(const EnvConfig& cfg, std::span<Rng> user_streams);

/// One synchronized slot for all users. `step_index` is the 0-based index
/// of this slot within the episode; done is set on the T_max-th slot.
StepResult env_step(std::span<const UserState> states, std::span<const PowerAction> actions,
                    const EnvConfig& cfg, std::span<Rng> user_streams, int step_index);

/// One independent stream per user derived from a run seed.
std::vector<Rng> make_user_streams(std::uint64_t seed, int n_users);

/// Stateful wrapper: owns the user streams, the user states and the slot counter.
class MecEnv {
 public:
  MecEnv(EnvConfig cfg, std::uint64_t seed);
  MecEnv(EnvConfig cfg, std::vector<Rng> user_streams);

  const std::vector<UserState>& reset();
  StepResult step(std::span<const PowerAction> actions);

  const EnvConfig& config() const { return cfg_; }
  const std::vector<UserState>& states() const { return states_; }
  int step_index() const { return t_; }
  Eigen::VectorXd observe(int user) const;

 private:
  EnvConfig cfg_;
  std::vector<Rng> streams_;
  std::vector<UserState> states_;
  int t_ = 0;
};

}  // namespace mecrl
