// SPDX-License-Identifier: Apache-2.0

#include "mecrl/validate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "mecrl/channel.hpp"
#include "mecrl/env.hpp"
#include "mecrl/neural.hpp"
#include "mecrl/rl.hpp"

namespace mecrl {

namespace {

std::string format(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// Pseudo-inverse through Eigen's complete orthogonal decomposition; shares
// no code with the Gauss-Jordan route it checks.
ComplexMatd oracle_pinv(const ComplexMatd& h) { return h.completeOrthogonalDecomposition().pseudoInverse(); }

ComplexMatd random_channel_matrix(int n, int m, Rng& rng) {
  ComplexMatd h(n, m);
  for (int j = 0; j < m; ++j) h.col(j) = sample_complex_gaussian<double>(static_cast<std::size_t>(n), 1e-9, rng);
  return h;
}

}  // namespace

CheckResult check_cpu_frequency() {
  const double f = cpu_frequency(2.0, 1e-27);
  const bool ok = std::abs(f / 1e9 - 1.26) <= 0.01;
  return {"cpu-frequency", ok, format("F = %.6f GHz (expected 1.26 +- 0.01)", f / 1e9)};
}

CheckResult check_doppler_correlation() {
  const double x = 2.0 * std::numbers::pi * 70.0 * 1e-3;
  const double rho = doppler_correlation(70.0, 1e-3);
  const double reference = std::cyl_bessel_j(0.0, x);
  const bool ok = rho >= 0.9515 && rho <= 0.9525 && std::abs(rho - reference) < 1e-12;
  return {"doppler-correlation", ok, format("J0(%.5f) = %.8f (std::cyl_bessel_j %.8f)", x, rho, reference)};
}

CheckResult check_zf_detector(int trials, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> power(0.01, 2.0);
  ChannelParams params;
  double worst_gamma = 0.0;
  double worst_delta = 0.0;
  for (int t = 0; t < trials; ++t) {
    const ComplexMatd h = random_channel_matrix(4, 3, rng);
    std::vector<UserChannel> users(3);
    std::vector<double> p_o(3);
    for (int m = 0; m < 3; ++m) {
      users[static_cast<std::size_t>(m)].h = h.col(m);
      p_o[static_cast<std::size_t>(m)] = power(rng);
    }
    const ZfReport zf = compute_zf(users, p_o, params);

    const ComplexMatd pinv = oracle_pinv(h);
    for (int m = 0; m < 3; ++m) {
      const double g2 = pinv.row(m).squaredNorm();
      const double expected = p_o[static_cast<std::size_t>(m)] / (params.sigma_r2 * g2);
      worst_gamma = std::max(worst_gamma, std::abs(zf.gamma[m] - expected) / expected);
    }
    // The library's own detector (H^H H)^{-1} H^H must null interference.
    const ComplexMatd detector = cmat_inverse(hermitian_gram(h)) * h.adjoint();
    const ComplexMatd gh = detector * h;
    worst_delta = std::max(worst_delta, (gh - ComplexMatd::Identity(3, 3)).cwiseAbs().maxCoeff());
  }
  const bool ok = worst_gamma < 1e-9 && worst_delta < 1e-9;
  return {"zf-detector", ok,
          format("%d trials: max rel gamma error %.3e, max |g_i^H h_j - delta_ij| %.3e", trials, worst_gamma,
                 worst_delta)};
}

CheckResult check_channel_statistics(int slots, std::uint64_t seed) {
  Rng rng(seed);
  ChannelParams params;
  UserChannel ch = init_channel(params, 100.0, rng);
  const Eigen::Index n = ch.h.size();
  Eigen::MatrixXd series(2 * n, slots);
  for (int t = 0; t < slots; ++t) {
    series.col(t).head(n) = ch.h.real();
    series.col(t).tail(n) = ch.h.imag();
    ch = evolve_channel(ch, params, rng);
  }
  const Eigen::VectorXd mean = series.rowwise().mean();
  const Eigen::MatrixXd centered = series.colwise() - mean;
  const double lag0 = centered.squaredNorm();
  const double lag1 = (centered.leftCols(slots - 1).array() * centered.rightCols(slots - 1).array()).sum();
  const double autocorr = lag1 / lag0;
  // E|h_i|^2 = E[re^2] + E[im^2] per complex entry.
  const double power = series.array().square().sum() / (static_cast<double>(n) * slots);
  const double expected = params.path_gain(100.0);
  const bool ok = std::abs(autocorr - 0.95) <= 0.01 && std::abs(power / expected - 1.0) <= 0.05;
  return {"channel-statistics", ok,
          format("lag-1 autocorrelation %.4f (0.95 +- 0.01), per-entry power %.4e (1e-9 +- 5%%)", autocorr, power)};
}

CheckResult check_gradients(int coordinates, std::uint64_t seed) {
  Rng rng(seed);
  const EnvConfig env;
  const AgentConfig agent_cfg;
  const int sd = env.state_dim();
  struct Shape {
    const char* name;
    std::vector<int> dims;
    OutputActivation act;
  };
  std::vector<int> actor_dims{sd};
  actor_dims.insert(actor_dims.end(), agent_cfg.actor_hidden.begin(), agent_cfg.actor_hidden.end());
  actor_dims.push_back(2);
  std::vector<int> critic_dims{sd + 2};
  critic_dims.insert(critic_dims.end(), agent_cfg.critic_hidden.begin(), agent_cfg.critic_hidden.end());
  critic_dims.push_back(1);
  const std::vector<Shape> shapes{{"actor", actor_dims, OutputActivation::tanh},
                                  {"critic", critic_dims, OutputActivation::identity}};

  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr double h = 1e-6;
  double worst = 0.0;
  std::string where;
  for (const auto& shape : shapes) {
    Mlp net = mlp_init(shape.dims, shape.act, rng);
    // Widen the output layer so the tanh path is exercised away from zero.
    for (auto& v : net.mutable_layers().back().weight.reshaped()) v *= 100.0;
    Eigen::MatrixXd x(shape.dims.front(), 3);
    for (auto& v : x.reshaped()) v = normal(rng);
    Eigen::MatrixXd weights(shape.dims.back(), 3);
    for (auto& v : weights.reshaped()) v = normal(rng);

    const auto cache = forward(net, x);
    const auto back = backward(net, cache, weights);
    const Eigen::VectorXd analytic = flatten_grads(back.grads);
    const Eigen::VectorXd theta = flatten_parameters(net);

    auto objective = [&](const Mlp& m) { return (predict(m, x).array() * weights.array()).sum(); };
    std::uniform_int_distribution<Eigen::Index> pick(0, theta.size() - 1);
    Mlp probe = net;
    for (int c = 0; c < coordinates; ++c) {
      const Eigen::Index i = pick(rng);
      Eigen::VectorXd shifted = theta;
      shifted[i] = theta[i] + h;
      assign_parameters(probe, shifted);
      const double up = objective(probe);
      shifted[i] = theta[i] - h;
      assign_parameters(probe, shifted);
      const double down = objective(probe);
      const double numeric = (up - down) / (2.0 * h);
      const double scale = std::max(std::abs(numeric), std::abs(analytic[i]));
      const double rel = scale < 1e-10 ? 0.0 : std::abs(numeric - analytic[i]) / scale;
      if (rel > worst) {
        worst = rel;
        where = shape.name;
      }
    }
  }
  const bool ok = worst < 1e-4;
  return {"gradient-fidelity", ok,
          format("%d coordinates per network, max relative error %.3e%s%s", coordinates, worst,
                 where.empty() ? "" : " in ", where.c_str())};
}

CheckResult check_td3_targets(int batches, std::uint64_t seed) {
  Rng rng(seed);
  AgentConfig cfg;
  cfg.actor_hidden = {32, 32};
  cfg.critic_hidden = {32, 32};
  const Eigen::Vector2d high(2.0, 2.0);
  const int sd = 10;
  Agent agent = make_agent(Algo::td3, sd, high, cfg, rng);
  // Give the target critics distinct, non-trivial outputs.
  for (auto& c : agent.critic_targets)
    for (auto& v : c.mutable_layers().back().weight.reshaped()) v *= 300.0;
  Agent twin = agent;
  twin.critic_targets[1] = twin.critic_targets[0];
  Agent ddpg_view = twin;
  ddpg_view.algo = Algo::ddpg;
  ddpg_view.critic_targets.resize(1);

  const Eigen::VectorXd range = high;
  const Eigen::VectorXd clip = cfg.noise_clip * range;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> reward(-20.0, 0.0);
  std::bernoulli_distribution terminal(0.3);
  constexpr int k = 16;
  long violations = 0;
  long mismatches = 0;
  long checked = 0;
  for (int b = 0; b < batches; ++b) {
    std::vector<Transition> items;
    for (int i = 0; i < k; ++i) {
      Transition t;
      t.s = Eigen::VectorXd::NullaryExpr(sd, [&] { return normal(rng); });
      t.a = Eigen::VectorXd::NullaryExpr(2, [&] { return 1.0 + normal(rng); }).cwiseMax(0.0).cwiseMin(2.0);
      t.r = reward(rng);
      t.s_next = Eigen::VectorXd::NullaryExpr(sd, [&] { return normal(rng); });
      t.done = terminal(rng);
      items.push_back(std::move(t));
    }
    const Batch batch = make_batch(items);
    const Eigen::MatrixXd noise = sample_target_noise(cfg.target_noise * range, k, rng);
    const Td3Targets out = td3_targets(agent, batch, noise, cfg.gamma, clip);

    // Smoothed target action, element by element.
    const Eigen::MatrixXd mu = predict(agent.actor_target, batch.s_next);
    Eigen::MatrixXd a_next(2, k);
    for (int i = 0; i < k; ++i)
      for (int d = 0; d < 2; ++d) {
        const double eps = std::clamp(noise(d, i), -clip[d], clip[d]);
        a_next(d, i) = std::clamp((mu(d, i) + 1.0) * 0.5 * range[d] + eps, 0.0, high[d]);
      }
    Eigen::MatrixXd xin(sd + 2, k);
    xin << batch.s_next, a_next;
    const Eigen::RowVectorXd q1 = predict(agent.critic_targets[0], xin);
    const Eigen::RowVectorXd q2 = predict(agent.critic_targets[1], xin);
    for (int i = 0; i < k; ++i) {
      const double bootstrap = cfg.gamma * (1.0 - batch.done[i]);
      const double y1 = batch.r[i] + bootstrap * q1[i];
      const double y2 = batch.r[i] + bootstrap * q2[i];
      ++checked;
      if (out.y[i] > y1 + 1e-12 || out.y[i] > y2 + 1e-12) ++violations;
      if (std::abs(out.y[i] - std::min(y1, y2)) > 1e-9 * (1.0 + std::abs(y1))) ++mismatches;
    }

    // Duplicated critics collapse to the single-critic target on the same a'.
    const Td3Targets dup = td3_targets(twin, batch, noise, cfg.gamma, clip);
    for (int i = 0; i < k; ++i) {
      const double y1 = batch.r[i] + cfg.gamma * (1.0 - batch.done[i]) * q1[i];
      if (std::abs(dup.y[i] - y1) > 1e-9 * (1.0 + std::abs(y1))) ++mismatches;
    }
    // Without smoothing noise the twin target equals the DDPG target.
    const Td3Targets quiet = td3_targets(twin, batch, Eigen::MatrixXd::Zero(2, k), cfg.gamma, clip);
    const Eigen::VectorXd ddpg = ddpg_targets(ddpg_view, batch, cfg.gamma);
    if ((quiet.y - ddpg).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + ddpg.cwiseAbs().maxCoeff())) ++mismatches;
  }
  const bool ok = violations == 0 && mismatches == 0;
  return {"td3-target", ok,
          format("%ld elements: %ld min-property violations, %ld target mismatches", checked, violations,
                 mismatches)};
}

CheckResult check_queue_trace(int steps, std::uint64_t seed) {
  EnvConfig cfg;
  MecEnv env(cfg, seed);
  env.reset();
  Rng action_rng(seed ^ 0x5eedu);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  int mismatches = 0;
  int non_integer = 0;
  double worst_gamma = 0.0;
  int drained = 0;
  for (int t = 0; t < steps; ++t) {
    const std::vector<UserState> before = env.states();
    std::vector<PowerAction> actions;
    for (int m = 0; m < cfg.n_users(); ++m) {
      // Alternate light and heavy slots so both branches of the max() occur.
      const double scale = t % 3 == 2 ? 1.0 : 0.05;
      actions.push_back(PowerAction::clipped(scale * cfg.p_l_max * u(action_rng), scale * cfg.p_o_max * u(action_rng), cfg));
    }
    const StepResult step = env.step(actions);

    ComplexMatd h(cfg.channel.n_antennas, cfg.n_users());
    for (int m = 0; m < cfg.n_users(); ++m) h.col(m) = before[static_cast<std::size_t>(m)].channel.h;
    const ComplexMatd pinv = oracle_pinv(h);

    for (int m = 0; m < cfg.n_users(); ++m) {
      const auto um = static_cast<std::size_t>(m);
      const StepMetrics& log = step.metrics[um];
      const double gamma = actions[um].p_o / (cfg.channel.sigma_r2 * pinv.row(m).squaredNorm());
      if (gamma > 0.0) worst_gamma = std::max(worst_gamma, std::abs(log.gamma - gamma) / gamma);
      if (log.arrival != std::floor(log.arrival) || log.arrival < 0.0) ++non_integer;

      const double d_l = cfg.channel.tau0 * std::cbrt(actions[um].p_l / cfg.kappa) / cfg.cycles_per_bit;
      const double d_o = cfg.channel.tau0 * cfg.bandwidth * std::log2(1.0 + log.gamma);
      const double residual = before[um].buffer_bits - d_l - d_o;
      if (residual <= 0.0) ++drained;
      const double expected = (residual > 0.0 ? residual : 0.0) + log.arrival;
      if (expected != step.next[um].buffer_bits || d_l != log.d_l || d_o != log.d_o) ++mismatches;
    }
  }
  const bool ok = mismatches == 0 && non_integer == 0 && worst_gamma < 1e-9;
  return {"queue-trace", ok,
          format("%d steps x %d users: %d buffer mismatches, %d non-integer arrivals, %d drained slots, "
                 "max rel gamma error %.2e",
                 steps, cfg.n_users(), mismatches, non_integer, drained, worst_gamma)};
}

CheckResult check_ou_statistics(int steps, std::uint64_t seed) {
  constexpr double theta = 0.15;
  constexpr double sigma = 0.12;
  OuNoise noise(1, theta, sigma);
  Rng rng(seed);
  for (int i = 0; i < 1000; ++i) noise.next(rng);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double x = noise.next(rng)[0];
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / steps;
  const double sd = std::sqrt(sum_sq / steps - mean * mean);
  const double expected = sigma / std::sqrt(2.0 * theta - theta * theta);
  const bool ok = std::abs(sd / expected - 1.0) <= 0.02;
  return {"ou-statistics", ok, format("stationary std %.5f vs %.5f (+- 2%%)", sd, expected)};
}

std::vector<CheckResult> run_validation_suite() {
  return {check_cpu_frequency(), check_doppler_correlation(), check_zf_detector(),       check_channel_statistics(),
          check_gradients(),     check_td3_targets(),         check_queue_trace(),       check_ou_statistics()};
}

}  // namespace mecrl
