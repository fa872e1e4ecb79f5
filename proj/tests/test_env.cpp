// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include <doctest.h>

#include "mecrl/env.hpp"

using namespace mecrl;

TEST_CASE("default config") {
  EnvConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.w1() == doctest::Approx(8.0));
  CHECK(cfg.w2() == doctest::Approx(0.2));
  CHECK(cfg.state_dim() == 10);
  CHECK(default_arrival_rate(1) == doctest::Approx(1.1e6));
  CHECK(default_arrival_rate(3) == doctest::Approx(0.9e6));

  cfg.lambda.pop_back();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = EnvConfig{};
  cfg.w = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = EnvConfig{};
  cfg.t_max = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("local and offloaded bits") {
  EnvConfig cfg;
  CHECK(local_bits(2.0, cfg) == doctest::Approx(2519.8).epsilon(1e-4));
  CHECK(local_bits(0.25, cfg) == doctest::Approx(1259.9).epsilon(1e-4));
  CHECK(local_bits(0.0, cfg) == 0.0);
  CHECK(cpu_frequency(1.0, 1e-27) == doctest::Approx(1e9));
  CHECK(offload_bits(1.0, cfg) == doctest::Approx(1000.0));
  CHECK(offload_bits(3.0, cfg) == doctest::Approx(2000.0));
  CHECK(offload_bits(0.0, cfg) == 0.0);

  // increasing and concave on a grid
  constexpr double h = 1e-3;
  for (int i = 1; i < 100; ++i) {
    const double p = 2.0 * i / 100.0;
    CHECK(local_bits(p + h, cfg) > local_bits(p, cfg));
    CHECK(local_bits(p + h, cfg) - 2.0 * local_bits(p, cfg) + local_bits(p - h, cfg) < 0.0);
    const double g = 50.0 * i;
    CHECK(offload_bits(g + 1.0, cfg) > offload_bits(g, cfg));
    CHECK(offload_bits(g + 1.0, cfg) - 2.0 * offload_bits(g, cfg) + offload_bits(g - 1.0, cfg) < 0.0);
  }
}

TEST_CASE("update_buffer") {
  CHECK(update_buffer(5000.0, 2519.8, 1000.0, 0.0) == doctest::Approx(1480.2));
  CHECK(update_buffer(1000.0, 2000.0, 1000.0, 1000.0) == 1000.0);
  CHECK(update_buffer(2000.0, 0.0, 0.0, 1000.0) == 3000.0);
  CHECK(update_buffer(0.0, 2519.8, 2000.0, 1100.0) == 1100.0);
  Rng rng(1);
  std::uniform_real_distribution<double> u(0.0, 5000.0);
  for (int i = 0; i < 1000; ++i) {
    const double b = u(rng), dl = u(rng), d_o = u(rng), a = u(rng);
    CHECK(update_buffer(b, dl, d_o, a) >= a);
    CHECK(update_buffer(b, dl, d_o, a) <= b + a);
  }
}

TEST_CASE("sample_arrival is Poisson with mean lambda tau0") {
  Rng rng(2);
  constexpr int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = sample_arrival(1.1e6, 1e-3, rng);
    REQUIRE(a == std::floor(a));
    REQUIRE(a >= 0.0);
    sum += a;
    sum2 += a * a;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(mean == doctest::Approx(1100.0).epsilon(0.01));
  CHECK(var == doctest::Approx(1100.0).epsilon(0.03));
  CHECK(sample_arrival(0.0, 1e-3, rng) == 0.0);
}

TEST_CASE("reward") {
  EnvConfig cfg;
  CHECK(reward({0.0, 0.0}, 0.0, cfg) == 0.0);
  CHECK(reward({0.5, 0.75}, 0.0, cfg) == doctest::Approx(-10.0));
  CHECK(reward({0.0, 0.0}, 12500.0, cfg) == doctest::Approx(-2.5));
  cfg.w = 0.0;
  CHECK(reward({2.0, 2.0}, 1000.0, cfg) == doctest::Approx(-1.0));
  cfg.w = 1.0;
  CHECK(reward({1.0, 0.0}, 1e9, cfg) == doctest::Approx(-10.0));
}

TEST_CASE("PowerAction::clipped") {
  EnvConfig cfg;
  const auto a = PowerAction::clipped(-1.0, 3.0, cfg);
  CHECK(a.p_l == 0.0);
  CHECK(a.p_o == 2.0);
  const auto b = PowerAction::clipped(0.7, 1.3, cfg);
  CHECK(b.p_l == 0.7);
  CHECK(b.p_o == 1.3);
}

TEST_CASE("encode_state") {
  EnvConfig cfg;
  UserState s;
  s.buffer_bits = 110000.0;
  s.phi_prev = 0.4;
  s.channel.h = ComplexVecd::Zero(4);
  s.channel.h[0] = std::complex<double>(std::sqrt(1e-9), -2.0 * std::sqrt(1e-9));
  const auto x = encode_state(s, 1.1e6, cfg);
  REQUIRE(x.size() == 10);
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == 0.4);
  CHECK(x[2] == doctest::Approx(1.0));
  CHECK(x[6] == doctest::Approx(-2.0));
  CHECK(x[3] == 0.0);
  CHECK(encode_state(s, 0.0, cfg)[0] == 110000.0);
}

TEST_CASE("reset") {
  EnvConfig cfg;
  MecEnv a(cfg, 11);
  MecEnv b(cfg, 11);
  const auto& sa = a.reset();
  const auto& sb = b.reset();
  REQUIRE(sa.size() == 3);
  for (std::size_t m = 0; m < 3; ++m) {
    CHECK(sa[m].buffer_bits == 0.0);
    CHECK(sa[m].phi_prev == 1.0);
    CHECK(sa[m].channel.distance == 100.0);
    CHECK(sa[m].channel.h == sb[m].channel.h);
  }
  CHECK(sa[0].channel.h != sa[1].channel.h);
  CHECK(a.step_index() == 0);
  CHECK(a.observe(0).size() == cfg.state_dim());

  MecEnv fresh(cfg, 11);
  const std::vector<PowerAction> acts(3);
  CHECK_THROWS_AS(fresh.step(acts), std::logic_error);
}

TEST_CASE("inert system stays empty and costs nothing") {
  EnvConfig cfg;
  cfg.lambda = {0.0, 0.0, 0.0};
  MecEnv env(cfg, 5);
  env.reset();
  const std::vector<PowerAction> acts(3);
  for (int t = 0; t < cfg.t_max; ++t) {
    const auto r = env.step(acts);
    for (const auto& m : r.metrics) {
      CHECK(m.reward == 0.0);
      CHECK(m.arrival == 0.0);
      CHECK(m.gamma == 0.0);
    }
    for (const auto& s : r.next) CHECK(s.buffer_bits == 0.0);
    CHECK(r.done == (t == cfg.t_max - 1));
  }
}

TEST_CASE("step bookkeeping") {
  EnvConfig cfg;
  MecEnv env(cfg, 6);
  env.reset();
  const std::vector<PowerAction> acts{{1.0, 0.5}, {0.0, 2.0}, {2.0, 0.0}};
  for (int t = 0; t < 50; ++t) {
    const auto before = env.states();
    const auto r = env.step(acts);
    for (std::size_t m = 0; m < 3; ++m) {
      const auto& mt = r.metrics[m];
      CHECK(mt.buffer_bits == before[m].buffer_bits);
      CHECK(mt.reward == doctest::Approx(reward(acts[m], before[m].buffer_bits, cfg)));
      CHECK(mt.d_l == doctest::Approx(local_bits(acts[m].p_l, cfg)));
      CHECK(mt.d_o == doctest::Approx(offload_bits(mt.gamma, cfg)));
      CHECK(r.next[m].buffer_bits == update_buffer(before[m].buffer_bits, mt.d_l, mt.d_o, mt.arrival));
      CHECK(r.next[m].phi_prev == mt.phi);
      CHECK(mt.phi > 0.0);
      CHECK(mt.phi <= 1.0);
      CHECK(std::abs(r.next[m].channel.cumulative_offset) <= 10.0);
    }
    CHECK(r.metrics[2].gamma == 0.0);
    CHECK(r.metrics[1].gamma > 0.0);
  }
  CHECK(env.step_index() == 50);
}

TEST_CASE("single user sees no interference") {
  EnvConfig cfg;
  cfg.channel.n_users = 1;
  cfg.lambda = {1e6};
  MecEnv env(cfg, 7);
  env.reset();
  const std::vector<PowerAction> acts{{0.0, 1.0}};
  for (int t = 0; t < 20; ++t) {
    const double h2 = env.states()[0].channel.h.squaredNorm();
    const auto r = env.step(acts);
    CHECK(r.metrics[0].phi == doctest::Approx(1.0));
    CHECK(r.metrics[0].gamma == doctest::Approx(h2 / cfg.channel.sigma_r2));
  }
}

TEST_CASE("without offloading, users evolve independently") {
  EnvConfig cfg;
  const auto streams = make_user_streams(21, 3);
  MecEnv joint(cfg, streams);
  joint.reset();

  std::vector<MecEnv> solo;
  for (std::size_t m = 0; m < 3; ++m) {
    EnvConfig one = cfg;
    one.channel.n_users = 1;
    one.lambda = {cfg.lambda[m]};
    solo.emplace_back(one, std::vector<Rng>{streams[m]});
    solo.back().reset();
  }

  const std::vector<PowerAction> acts{{0.3, 0.0}, {1.0, 0.0}, {2.0, 0.0}};
  for (int t = 0; t < cfg.t_max; ++t) {
    const auto r = joint.step(acts);
    for (std::size_t m = 0; m < 3; ++m) {
      const auto rs = solo[m].step(std::vector<PowerAction>{acts[m]});
      CHECK(r.next[m].buffer_bits == rs.next[0].buffer_bits);
      CHECK(r.metrics[m].reward == rs.metrics[0].reward);
      CHECK(r.next[m].channel.h == rs.next[0].channel.h);
    }
  }
}

TEST_CASE("same seed, same trajectory") {
  EnvConfig cfg;
  MecEnv a(cfg, 99);
  MecEnv b(cfg, 99);
  MecEnv c(cfg, 100);
  a.reset();
  b.reset();
  c.reset();
  const std::vector<PowerAction> acts{{0.5, 0.5}, {0.5, 1.5}, {1.0, 1.0}};
  bool differs = false;
  for (int t = 0; t < 100; ++t) {
    const auto ra = a.step(acts);
    const auto rb = b.step(acts);
    const auto rc = c.step(acts);
    for (std::size_t m = 0; m < 3; ++m) {
      CHECK(ra.metrics[m].reward == rb.metrics[m].reward);
      CHECK(ra.next[m].channel.h == rb.next[m].channel.h);
      differs = differs || ra.next[m].buffer_bits != rc.next[m].buffer_bits;
    }
  }
  CHECK(differs);
}
