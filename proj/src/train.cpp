// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <stdexcept>

#include "mecrl/rl.hpp"

namespace mecrl {

Rng make_agent_stream(std::uint64_t seed, int user) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6167u,
                    static_cast<std::uint32_t>(user)};
  return Rng(seq);
}

std::vector<Agent> make_agents(const EnvConfig& env_cfg, Algo algo, const AgentConfig& cfg, std::uint64_t seed) {
  const Eigen::Vector2d high(env_cfg.p_l_max, env_cfg.p_o_max);
  std::vector<Agent> agents;
  for (int m = 0; m < env_cfg.n_users(); ++m) {
    // Initialization draws from a stream separate from the training stream.
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x696eu,
                      static_cast<std::uint32_t>(m)};
    Rng init_rng(seq);
    agents.push_back(make_agent(algo, env_cfg.state_dim(), high, cfg, init_rng));
  }
  return agents;
}

TrainResult train(const EnvConfig& env_cfg, Algo algo, const AgentConfig& cfg, const TrainOptions& opts) {
  return run_agents(env_cfg, make_agents(env_cfg, algo, cfg, opts.seed), cfg, opts);
}

TrainResult run_agents(const EnvConfig& env_cfg, std::vector<Agent> agents, const AgentConfig& cfg,
                       const TrainOptions& opts) {
  cfg.validate();
  MecEnv env(env_cfg, opts.seed);
  const int m_users = env_cfg.n_users();
  if (static_cast<int>(agents.size()) != m_users) {
    throw std::invalid_argument("run_agents: one agent per user required");
  }

  std::vector<Rng> rngs;
  std::vector<OuNoise> noises;
  TrainResult result;
  for (int m = 0; m < m_users; ++m) {
    rngs.push_back(make_agent_stream(opts.seed, m));
    noises.emplace_back(agents[static_cast<std::size_t>(m)].action_dim(), cfg.ou_theta, cfg.ou_sigma);
    result.buffers.emplace_back(cfg.buffer_capacity);
  }
  const auto warmup = static_cast<std::size_t>(cfg.warmup);
  const Algo algo = agents.front().algo;

  std::vector<PowerAction> actions(static_cast<std::size_t>(m_users));
  std::vector<Eigen::VectorXd> obs(actions.size());
  std::vector<Eigen::VectorXd> raw(actions.size());

  for (int ep = 1; ep <= opts.episodes; ++ep) {
    env.reset();
    for (auto& n : noises) n.reset();
    std::vector<double> sum_r(actions.size(), 0.0);
    std::vector<double> sum_p(actions.size(), 0.0);
    std::vector<double> sum_b(actions.size(), 0.0);
    int steps = 0;

    for (int t = 0; t < env_cfg.t_max; ++t) {
      for (std::size_t m = 0; m < actions.size(); ++m) {
        obs[m] = env.observe(static_cast<int>(m));
        raw[m] = act(agents[m], obs[m], opts.explore ? &noises[m] : nullptr, rngs[m]);
        actions[m] = to_power_action(raw[m], env_cfg);
      }
      const StepResult step = env.step(actions);
      ++steps;

      for (std::size_t m = 0; m < actions.size(); ++m) {
        const StepMetrics& mt = step.metrics[m];
        sum_r[m] += mt.reward;
        sum_p[m] += mt.power_total;
        sum_b[m] += mt.buffer_bits / 1000.0;
        if (opts.learn) {
          // Truncation at T_max is not terminal: store d = 0.
          result.buffers[m].push(Transition{obs[m], raw[m], mt.reward, env.observe(static_cast<int>(m)), false});
        }
        if (opts.on_step) opts.on_step(StepTrace{ep, t, static_cast<int>(m) + 1, actions[m], mt});
      }

      if (opts.learn) {
        for (std::size_t m = 0; m < actions.size(); ++m) {
          if (result.buffers[m].size() < warmup) continue;
          for (int u = 0; u < cfg.updates_per_step; ++u) {
            const Batch batch = result.buffers[m].sample(static_cast<std::size_t>(cfg.batch_size), rngs[m]);
            agent_update(agents[m], batch, cfg, rngs[m]);
          }
        }
      }
      if (step.done) break;
    }

    std::vector<EpisodeRecord> episode;
    for (std::size_t m = 0; m < actions.size(); ++m) {
      episode.push_back(EpisodeRecord{ep, static_cast<int>(m) + 1, algo, opts.seed, sum_r[m] / steps,
                                      sum_p[m] / steps, sum_b[m] / steps});
    }
    if (opts.on_episode) opts.on_episode(episode);
    result.records.insert(result.records.end(), episode.begin(), episode.end());
  }
  result.agents = std::move(agents);
  return result;
}

}  // namespace mecrl
