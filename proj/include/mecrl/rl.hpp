// SPDX-License-Identifier: Apache-2.0
//
// DDPG and TD3 agents for the per-user power-allocation policy, their
// replay buffer and exploration noise, and the decentralized training loop
// in which every user learns independently on its own local observation.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mecrl/env.hpp"
#include "mecrl/neural.hpp"

namespace mecrl {

enum class Algo { ddpg, td3 };

std::string to_string(Algo algo);
/// Accepts "ddpg" or "td3"; throws std::invalid_argument otherwise.
Algo parse_algo(const std::string& name);

struct Transition {
  Eigen::VectorXd s;
  Eigen::VectorXd a;  // powers in watts
  double r = 0.0;
  Eigen::VectorXd s_next;
  bool done = false;
};

/// Column-stacked transitions, one sample per column.
struct Batch {
  Eigen::MatrixXd s;
  Eigen::MatrixXd a;
  Eigen::VectorXd r;
  Eigen::MatrixXd s_next;
  Eigen::VectorXd done;

  Eigen::Index size() const { return r.size(); }
};

Batch make_batch(const std::vector<Transition>& items);

/// Fixed-capacity FIFO ring with uniform sampling with replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  /// Throws std::logic_error when fewer than k items are stored.
  Batch sample(std::size_t k, Rng& rng) const;
  std::vector<std::size_t> sample_indices(std::size_t k, Rng& rng) const;

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// i-th oldest stored transition.
  const Transition& at(std::size_t i) const;
  void clear();

 private:
  std::size_t capacity_;
  std::vector<Transition> items_;
  std::size_t cursor_ = 0;  // next slot to overwrite once full
};

/// Discrete Ornstein-Uhlenbeck process with zero mean and unit time step.
class OuNoise {
 public:
  OuNoise(int dim, double theta, double sigma);

  const Eigen::VectorXd& next(Rng& rng);
  void reset() { x_.setZero(); }
  const Eigen::VectorXd& state() const { return x_; }
  void set_state(const Eigen::VectorXd& x) { x_ = x; }
  double theta() const { return theta_; }
  double sigma() const { return sigma_; }

 private:
  double theta_;
  double sigma_;
  Eigen::VectorXd x_;
};

struct AgentConfig {
  double gamma = 0.99;
  double tau = 0.001;
  int batch_size = 64;
  int warmup = 1000;
  int updates_per_step = 1;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  std::vector<int> actor_hidden{256, 128};
  std::vector<int> critic_hidden{256, 128};
  double ou_theta = 0.15;
  double ou_sigma = 0.12;
  std::size_t buffer_capacity = 250000;
  // TD3 only; noise magnitudes are fractions of each action's range.
  double target_noise = 0.1;
  double noise_clip = 0.25;
  int update_every = 2;

  void validate() const;
};

/// Actor, critic(s) and their targets plus optimizer state. DDPG owns one
/// critic, TD3 two; target networks mirror their mains.
struct Agent {
  Algo algo = Algo::ddpg;
  Eigen::VectorXd action_low;
  Eigen::VectorXd action_high;
  Mlp actor;
  Mlp actor_target;
  std::vector<Mlp> critics;
  std::vector<Mlp> critic_targets;
  AdamState actor_opt;
  std::vector<AdamState> critic_opts;
  std::int64_t update_count = 0;

  int state_dim() const { return actor.input_dim(); }
  int action_dim() const { return actor.output_dim(); }
};

Agent make_agent(Algo algo, int state_dim, const Eigen::VectorXd& action_high,
                 const AgentConfig& cfg, Rng& rng);

/// tanh output in [-1, 1] -> [low, high], column-wise.
Eigen::MatrixXd map_action(const Agent& agent, const Eigen::MatrixXd& y);

/// Actor action, plus OU noise scaled by the action half-range when
/// `noise` is given, clipped to the bounds.
Eigen::VectorXd act(const Agent& agent, const Eigen::VectorXd& s, OuNoise* noise, Rng& rng);

PowerAction to_power_action(const Eigen::VectorXd& a, const EnvConfig& cfg);

struct UpdateDiagnostics {
  double critic_loss = 0.0;
  double actor_objective = 0.0;  // mean Q(s, mu(s)) before the actor step
  bool actor_updated = false;
  Eigen::VectorXd targets;
};

/// r + gamma (1 - d) Q'(s', mu'(s')).
Eigen::VectorXd ddpg_targets(const Agent& agent, const Batch& batch, double gamma);

struct Td3Targets {
  Eigen::VectorXd y;
  Eigen::VectorXd q1;  // first target critic at (s', a')
  Eigen::VectorXd q2;
  Eigen::MatrixXd next_action;
};

/// Target actions are clip(mu'(s') + clip(noise, -c, c), low, high); `noise`
/// holds raw unclipped perturbations in action units. y uses min(Q1', Q2').
Td3Targets td3_targets(const Agent& agent, const Batch& batch, const Eigen::MatrixXd& noise,
                       double gamma, const Eigen::VectorXd& clip);

/// Gaussian target-smoothing noise with per-row std `sigma`.
Eigen::MatrixXd sample_target_noise(const Eigen::VectorXd& sigma, Eigen::Index cols, Rng& rng);

/// Critic regression, actor ascent, soft target updates.
UpdateDiagnostics ddpg_update(Agent& agent, const Batch& batch, const AgentConfig& cfg);

/// Both critics regress onto the clipped double-Q target; the actor (via
/// critic 1) and all targets move only when j % update_every == 0.
UpdateDiagnostics td3_update(Agent& agent, const Batch& batch, std::int64_t j, const AgentConfig& cfg,
                             Rng& rng);

/// Dispatches on the agent's algorithm and advances its update counter.
UpdateDiagnostics agent_update(Agent& agent, const Batch& batch, const AgentConfig& cfg, Rng& rng);

struct EpisodeRecord {
  int episode = 0;  // 1-based
  int user = 0;     // 1-based
  Algo algo = Algo::ddpg;
  std::uint64_t seed = 0;
  double avg_reward = 0.0;
  double avg_power = 0.0;      // W
  double avg_delay_kbit = 0.0;  // mean start-of-slot backlog
};

struct StepTrace {
  int episode = 0;
  int step = 0;
  int user = 0;
  PowerAction action;
  StepMetrics metrics;
};

struct TrainOptions {
  int episodes = 2000;
  std::uint64_t seed = 0;
  bool explore = true;
  bool learn = true;
  /// Optional per-step observer (used for --trace).
  std::function<void(const StepTrace&)> on_step;
  /// Optional per-episode observer, called with the episode's M records.
  std::function<void(const std::vector<EpisodeRecord>&)> on_episode;
};

struct TrainResult {
  std::vector<EpisodeRecord> records;
  std::vector<Agent> agents;
  std::vector<ReplayBuffer> buffers;
};

/// Seeds an agent's private stream; user is 0-based.
Rng make_agent_stream(std::uint64_t seed, int user);

/// One agent per user, all starting fresh from `seed`.
std::vector<Agent> make_agents(const EnvConfig& env_cfg, Algo algo, const AgentConfig& cfg,
                               std::uint64_t seed);

/// Runs `opts.episodes` episodes. Each agent acts on its own observation,
/// stores its own transitions (d = 0 at truncation) and, once its buffer
/// holds `warmup` items, performs `updates_per_step` updates per slot.
TrainResult train(const EnvConfig& env_cfg, Algo algo, const AgentConfig& cfg, const TrainOptions& opts);

/// As train(), starting from supplied agents (e.g. loaded checkpoints).
TrainResult run_agents(const EnvConfig& env_cfg, std::vector<Agent> agents, const AgentConfig& cfg,
                       const TrainOptions& opts);

}  // namespace mecrl
