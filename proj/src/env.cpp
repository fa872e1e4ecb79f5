// SPDX-License-Identifier: Apache-2.0

#include "mecrl/env.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace mecrl {

void EnvConfig::validate() const {
  channel.validate();
  if (static_cast<int>(lambda.size()) != channel.n_users) {
    throw std::invalid_argument("env.lambda must hold one rate per user");
  }
  for (double l : lambda) {
    if (!(l >= 0.0)) throw std::invalid_argument("env.lambda entries must be >= 0");
  }
  if (!(p_l_max >= 0.0 && p_o_max >= 0.0)) throw std::invalid_argument("env: power limits must be >= 0");
  if (!(kappa > 0.0 && cycles_per_bit > 0.0 && bandwidth > 0.0 && base_distance > kMaxMobilityOffset)) {
    throw std::invalid_argument("env: kappa, cycles_per_bit, bandwidth must be > 0 and base_distance > 10");
  }
  if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("env.w must lie in [0, 1]");
  if (t_max < 1) throw std::invalid_argument("env.t_max must be >= 1");
}

double default_arrival_rate(int user) { return (1.2 - 0.1 * user) * 1e6; }

PowerAction PowerAction::clipped(double p_l, double p_o, const EnvConfig& cfg) {
  return {std::clamp(p_l, 0.0, cfg.p_l_max), std::clamp(p_o, 0.0, cfg.p_o_max)};
}

double cpu_frequency(double p_l, double kappa) { return std::cbrt(p_l / kappa); }

double local_bits(double p_l, const EnvConfig& cfg) {
  return cfg.channel.tau0 * cpu_frequency(p_l, cfg.kappa) / cfg.cycles_per_bit;
}

double offload_bits(double gamma, const EnvConfig& cfg) {
  return cfg.channel.tau0 * cfg.bandwidth * std::log2(1.0 + gamma);
}

double update_buffer(double buffer, double d_l, double d_o, double arrival) {
  return std::max(buffer - d_l - d_o, 0.0) + arrival;
}

double sample_arrival(double lambda, double tau0, Rng& rng) {
  const double mean = lambda * tau0;
  if (!(mean > 0.0)) return 0.0;
  std::poisson_distribution<long long> poisson(mean);
  return static_cast<double>(poisson(rng));
}

double reward(const PowerAction& action, double buffer_bits, const EnvConfig& cfg) {
  return -cfg.w1() * (action.p_l + action.p_o) - cfg.w2() * (buffer_bits / 1000.0);
}

Eigen::VectorXd encode_state(const UserState& s, double lambda, const EnvConfig& cfg) {
  const Eigen::Index n = cfg.channel.n_antennas;
  const double buffer_scale = lambda * cfg.channel.tau0 * 100.0;
  const double s_ref = std::sqrt(cfg.channel.path_gain(cfg.base_distance));
  Eigen::VectorXd x(2 * n + 2);
  x[0] = buffer_scale > 0.0 ? s.buffer_bits / buffer_scale : s.buffer_bits;
  x[1] = s.phi_prev;
  x.segment(2, n) = s.channel.h.real() / s_ref;
  x.segment(2 + n, n) = s.channel.h.imag() / s_ref;
  return x;
}

std::vector<UserState> env_reset(const EnvConfig& cfg, std::span<Rng> user_streams) {
  if (static_cast<int>(user_streams.size()) != cfg.n_users()) {
    throw std::invalid_argument("env_reset: one stream per user required");
  }
  std::vector<UserState> states(user_streams.size());
  for (std::size_t m = 0; m < states.size(); ++m) {
    states[m].buffer_bits = 0.0;
    states[m].phi_prev = 1.0;
    states[m].channel = init_channel(cfg.channel, cfg.base_distance, user_streams[m]);
  }
  return states;
}

StepResult env_step(std::span<const UserState> states, std::span<const PowerAction> actions,
                    const EnvConfig& cfg, std::span<Rng> user_streams, int step_index) {
  const std::size_t m_users = states.size();
  if (actions.size() != m_users || user_streams.size() != m_users ||
      static_cast<int>(m_users) != cfg.n_users()) {
    throw std::invalid_argument("env_step: states, actions and streams must have one entry per user");
  }

  std::vector<UserChannel> channels(m_users);
  std::vector<double> p_o(m_users);
  for (std::size_t m = 0; m < m_users; ++m) {
    channels[m] = states[m].channel;
    p_o[m] = actions[m].p_o;
  }
  const ZfReport zf = compute_zf(channels, p_o, cfg.channel);

  StepResult out;
  out.next.resize(m_users);
  out.metrics.resize(m_users);
  for (std::size_t m = 0; m < m_users; ++m) {
    const auto idx = static_cast<Eigen::Index>(m);
    StepMetrics& mt = out.metrics[m];
    mt.gamma = zf.gamma[idx];
    mt.phi = zf.phi[idx];
    mt.d_l = local_bits(actions[m].p_l, cfg);
    mt.d_o = offload_bits(mt.gamma, cfg);
    mt.arrival = sample_arrival(cfg.lambda[m], cfg.channel.tau0, user_streams[m]);
    mt.buffer_bits = states[m].buffer_bits;
    mt.power_total = actions[m].p_l + actions[m].p_o;
    mt.reward = reward(actions[m], states[m].buffer_bits, cfg);

    UserState& next = out.next[m];
    next.buffer_bits = update_buffer(states[m].buffer_bits, mt.d_l, mt.d_o, mt.arrival);
    next.phi_prev = mt.phi;
    next.channel = evolve_channel(step_mobility(states[m].channel, user_streams[m]), cfg.channel,
                                  user_streams[m]);
  }
  out.done = step_index + 1 >= cfg.t_max;
  return out;
}

std::vector<Rng> make_user_streams(std::uint64_t seed, int n_users) {
  std::vector<Rng> streams;
  streams.reserve(static_cast<std::size_t>(n_users));
  for (int m = 0; m < n_users; ++m) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      0x656e76u, static_cast<std::uint32_t>(m)};
    streams.emplace_back(seq);
  }
  return streams;
}

MecEnv::MecEnv(EnvConfig cfg, std::uint64_t seed)
    : MecEnv(cfg, make_user_streams(seed, cfg.n_users())) {}

MecEnv::MecEnv(EnvConfig cfg, std::vector<Rng> user_streams)
    : cfg_(std::move(cfg)), streams_(std::move(user_streams)) {
  cfg_.validate();
  if (static_cast<int>(streams_.size()) != cfg_.n_users()) {
    throw std::invalid_argument("MecEnv: one stream per user required");
  }
}

const std::vector<UserState>& MecEnv::reset() {
  states_ = env_reset(cfg_, streams_);
  t_ = 0;
  return states_;
}

StepResult MecEnv::step(std::span<const PowerAction> actions) {
  if (states_.empty()) throw std::logic_error("MecEnv::step called before reset");
  StepResult result = env_step(states_, actions, cfg_, streams_, t_);
  states_ = result.next;
  ++t_;
  return result;
}

Eigen::VectorXd MecEnv::observe(int user) const {
  const auto m = static_cast<std::size_t>(user);
  return encode_state(states_.at(m), cfg_.lambda.at(m), cfg_);
}

}  // namespace mecrl
