// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <stdexcept>

#include "mecrl/rl.hpp"

namespace mecrl {

std::string to_string(Algo algo) { return algo == Algo::td3 ? "td3" : "ddpg"; }

Algo parse_algo(const std::string& name) {
  if (name == "ddpg") return Algo::ddpg;
  if (name == "td3") return Algo::td3;
  throw std::invalid_argument("unknown algorithm '" + name + "' (expected ddpg or td3)");
}

void AgentConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("agent.gamma must lie in [0, 1)");
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("agent.tau must lie in [0, 1]");
  if (batch_size < 1) throw std::invalid_argument("agent.batch_size must be >= 1");
  if (warmup < batch_size) throw std::invalid_argument("agent.warmup must be >= agent.batch_size");
  if (updates_per_step < 0) throw std::invalid_argument("agent.updates_per_step must be >= 0");
  if (!(actor_lr > 0.0 && critic_lr > 0.0)) throw std::invalid_argument("agent: learning rates must be > 0");
  if (buffer_capacity < 1) throw std::invalid_argument("agent.buffer_capacity must be >= 1");
  if (update_every < 1) throw std::invalid_argument("agent.update_every must be >= 1");
  if (!(target_noise >= 0.0 && noise_clip >= 0.0)) throw std::invalid_argument("agent: TD3 noise must be >= 0");
  if (!(ou_theta >= 0.0 && ou_sigma >= 0.0)) throw std::invalid_argument("agent: OU parameters must be >= 0");
  for (int h : actor_hidden)
    if (h < 1) throw std::invalid_argument("agent.actor_hidden widths must be >= 1");
  for (int h : critic_hidden)
    if (h < 1) throw std::invalid_argument("agent.critic_hidden widths must be >= 1");
}

Agent make_agent(Algo algo, int state_dim, const Eigen::VectorXd& action_high, const AgentConfig& cfg,
                 Rng& rng) {
  const int action_dim = static_cast<int>(action_high.size());
  std::vector<int> actor_dims{state_dim};
  actor_dims.insert(actor_dims.end(), cfg.actor_hidden.begin(), cfg.actor_hidden.end());
  actor_dims.push_back(action_dim);
  std::vector<int> critic_dims{state_dim + action_dim};
  critic_dims.insert(critic_dims.end(), cfg.critic_hidden.begin(), cfg.critic_hidden.end());
  critic_dims.push_back(1);

  Agent agent;
  agent.algo = algo;
  agent.action_low = Eigen::VectorXd::Zero(action_dim);
  agent.action_high = action_high;
  agent.actor = mlp_init(actor_dims, OutputActivation::tanh, rng);
  agent.actor_target = agent.actor;
  const int n_critics = algo == Algo::td3 ? 2 : 1;
  for (int i = 0; i < n_critics; ++i) {
    agent.critics.push_back(mlp_init(critic_dims, OutputActivation::identity, rng));
  }
  agent.critic_targets = agent.critics;
  agent.actor_opt = AdamState(agent.actor, AdamConfig{cfg.actor_lr});
  for (const auto& c : agent.critics) agent.critic_opts.emplace_back(c, AdamConfig{cfg.critic_lr});
  return agent;
}

namespace {

Eigen::VectorXd half_range(const Agent& agent) { return 0.5 * (agent.action_high - agent.action_low); }

Eigen::MatrixXd clip_actions(const Agent& agent, Eigen::MatrixXd a) {
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    a.col(c) = a.col(c).cwiseMax(agent.action_low).cwiseMin(agent.action_high);
  }
  return a;
}

Eigen::MatrixXd critic_input(const Eigen::MatrixXd& s, const Eigen::MatrixXd& a) {
  Eigen::MatrixXd x(s.rows() + a.rows(), s.cols());
  x.topRows(s.rows()) = s;
  x.bottomRows(a.rows()) = a;
  return x;
}

double regress_critic(Mlp& critic, AdamState& opt, const Batch& batch, const Eigen::VectorXd& y) {
  const auto cache = forward(critic, critic_input(batch.s, batch.a));
  const Eigen::RowVectorXd err = cache.output.row(0) - y.transpose();
  const double n = static_cast<double>(batch.size());
  const auto back = backward(critic, cache, (2.0 / n) * err);
  opt_step(critic, back.grads, opt);
  return err.squaredNorm() / n;
}

// Deterministic policy gradient through critic `critic`: ascend mean Q(s, mu(s)).
double improve_actor(Agent& agent, const Mlp& critic, const Batch& batch) {
  const auto actor_cache = forward(agent.actor, batch.s);
  const Eigen::MatrixXd a = map_action(agent, actor_cache.output);
  const auto critic_cache = forward(critic, critic_input(batch.s, a));
  const double n = static_cast<double>(batch.size());
  const double objective = critic_cache.output.mean();
  const Eigen::MatrixXd grad_q = Eigen::MatrixXd::Constant(1, batch.size(), -1.0 / n);
  const auto critic_back = backward(critic, critic_cache, grad_q);
  const Eigen::MatrixXd grad_a = critic_back.grad_x.bottomRows(agent.action_dim());
  const Eigen::MatrixXd grad_y = grad_a.array().colwise() * half_range(agent).array();
  const auto actor_back = backward(agent.actor, actor_cache, grad_y);
  opt_step(agent.actor, actor_back.grads, agent.actor_opt);
  return objective;
}

}  // namespace

Eigen::MatrixXd map_action(const Agent& agent, const Eigen::MatrixXd& y) {
  const Eigen::VectorXd half = half_range(agent);
  Eigen::MatrixXd a = (y.array() + 1.0).colwise() * half.array();
  a.colwise() += agent.action_low;
  return a;
}

Eigen::VectorXd act(const Agent& agent, const Eigen::VectorXd& s, OuNoise* noise, Rng& rng) {
  Eigen::MatrixXd a = map_action(agent, predict(agent.actor, s));
  if (noise != nullptr) {
    a.col(0) += noise->next(rng).cwiseProduct(half_range(agent));
  }
  return clip_actions(agent, std::move(a)).col(0);
}

PowerAction to_power_action(const Eigen::VectorXd& a, const EnvConfig& cfg) {
  return PowerAction::clipped(a[0], a[1], cfg);
}

Eigen::VectorXd ddpg_targets(const Agent& agent, const Batch& batch, double gamma) {
  const Eigen::MatrixXd a_next = map_action(agent, predict(agent.actor_target, batch.s_next));
  const Eigen::VectorXd q_next =
      predict(agent.critic_targets.front(), critic_input(batch.s_next, a_next)).row(0).transpose();
  return batch.r.array() + gamma * (1.0 - batch.done.array()) * q_next.array();
}

Eigen::MatrixXd sample_target_noise(const Eigen::VectorXd& sigma, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd noise(sigma.size(), cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < sigma.size(); ++r) noise(r, c) = sigma[r] * normal(rng);
  return noise;
}

Td3Targets td3_targets(const Agent& agent, const Batch& batch, const Eigen::MatrixXd& noise, double gamma,
                       const Eigen::VectorXd& clip) {
  if (agent.critic_targets.size() != 2) throw std::invalid_argument("td3_targets: agent needs two critics");
  Eigen::MatrixXd smoothed = noise;
  for (Eigen::Index c = 0; c < smoothed.cols(); ++c) {
    smoothed.col(c) = smoothed.col(c).cwiseMax(-clip).cwiseMin(clip);
  }
  Td3Targets out;
  out.next_action = clip_actions(agent, map_action(agent, predict(agent.actor_target, batch.s_next)) + smoothed);
  const Eigen::MatrixXd x = critic_input(batch.s_next, out.next_action);
  out.q1 = predict(agent.critic_targets[0], x).row(0).transpose();
  out.q2 = predict(agent.critic_targets[1], x).row(0).transpose();
  out.y = batch.r.array() + gamma * (1.0 - batch.done.array()) * out.q1.cwiseMin(out.q2).array();
  return out;
}

UpdateDiagnostics ddpg_update(Agent& agent, const Batch& batch, const AgentConfig& cfg) {
  if (batch.size() < 1) throw std::invalid_argument("ddpg_update: empty batch");
  UpdateDiagnostics diag;
  diag.targets = ddpg_targets(agent, batch, cfg.gamma);
  diag.critic_loss = regress_critic(agent.critics.front(), agent.critic_opts.front(), batch, diag.targets);
  diag.actor_objective = improve_actor(agent, agent.critics.front(), batch);
  diag.actor_updated = true;
  soft_update(agent.critic_targets.front(), agent.critics.front(), cfg.tau);
  soft_update(agent.actor_target, agent.actor, cfg.tau);
  return diag;
}

UpdateDiagnostics td3_update(Agent& agent, const Batch& batch, std::int64_t j, const AgentConfig& cfg, Rng& rng) {
  if (batch.size() < 1) throw std::invalid_argument("td3_update: empty batch");
  const Eigen::VectorXd range = agent.action_high - agent.action_low;
  const Eigen::MatrixXd noise = sample_target_noise(cfg.target_noise * range, batch.size(), rng);
  UpdateDiagnostics diag;
  diag.targets = td3_targets(agent, batch, noise, cfg.gamma, cfg.noise_clip * range).y;
  for (std::size_t i = 0; i < 2; ++i) {
    diag.critic_loss += regress_critic(agent.critics[i], agent.critic_opts[i], batch, diag.targets) / 2.0;
  }
  if (j % cfg.update_every == 0) {
    diag.actor_objective = improve_actor(agent, agent.critics[0], batch);
    diag.actor_updated = true;
    for (std::size_t i = 0; i < 2; ++i) soft_update(agent.critic_targets[i], agent.critics[i], cfg.tau);
    soft_update(agent.actor_target, agent.actor, cfg.tau);
  }
  return diag;
}

UpdateDiagnostics agent_update(Agent& agent, const Batch& batch, const AgentConfig& cfg, Rng& rng) {
  ++agent.update_count;
  if (agent.algo == Algo::td3) return td3_update(agent, batch, agent.update_count, cfg, rng);
  return ddpg_update(agent, batch, cfg);
}

}  // namespace mecrl
