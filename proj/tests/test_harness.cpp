// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "mecrl/checkpoint.hpp"
#include "mecrl/cli.hpp"
#include "mecrl/config.hpp"
#include "mecrl/errors.hpp"
#include "mecrl/metrics.hpp"

using namespace mecrl;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mecrl_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<EpisodeRecord> synthetic(Algo algo, int episodes, int users, double offset) {
  std::vector<EpisodeRecord> r;
  for (int e = 1; e <= episodes; ++e)
    for (int u = 1; u <= users; ++u)
      r.push_back({e, u, algo, 1, -5.0 + offset + 0.01 * e, 0.5 - 0.01 * offset, 3.0 - offset});
  return r;
}

// Tiny networks and short episodes so CLI runs finish quickly.
std::vector<std::string> tiny_args() {
  return {"--override", "env.t_max=5",           "--override", "agent.actor_hidden=[8,8]",
          "--override", "agent.critic_hidden=[8,8]", "--override", "agent.batch_size=4",
          "--override", "agent.warmup=8"};
}

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

const char* kGoldenDefaults = R"({
  "algo": "td3", "seed": 1, "episodes": 2000, "out": "out", "trace": false, "tail": 0.25,
  "channel": {"n_antennas": 4, "n_users": 3, "h0": 0.001, "d0": 1.0, "alpha": 3.0, "rho": 0.95,
              "tau0": 0.001, "fd": 70.0, "sigma_r2": 1e-9},
  "env": {"lambda": [1100000.0, 1000000.0, 900000.0], "p_l_max": 2.0, "p_o_max": 2.0, "kappa": 1e-27,
          "cycles_per_bit": 500.0, "bandwidth": 1000000.0, "w": 0.8, "t_max": 200, "base_distance": 100.0},
  "agent": {"gamma": 0.99, "tau": 0.001, "batch_size": 64, "warmup": 1000, "updates_per_step": 1,
            "actor_lr": 0.0001, "critic_lr": 0.001, "actor_hidden": [256, 128], "critic_hidden": [256, 128],
            "ou_theta": 0.15, "ou_sigma": 0.12, "buffer_capacity": 250000, "target_noise": 0.1,
            "noise_clip": 0.25, "update_every": 2}
})";

}  // namespace

TEST_CASE("config defaults match the frozen document") {
  const json golden = json::parse(kGoldenDefaults);
  const json ours = to_json(RunConfig{});
  CHECK(ours.dump() == golden.dump());
  CHECK(to_json(run_config_from_json(json::object())).dump() == golden.dump());
}

TEST_CASE("config round trip is a fixed point") {
  json doc = json::parse(kGoldenDefaults);
  doc["seed"] = 42;
  doc["env"]["w"] = 0.3;
  doc["agent"]["actor_hidden"] = {64, 32};
  const RunConfig cfg = run_config_from_json(doc);
  CHECK(cfg.seed == 42);
  CHECK(cfg.env.w == 0.3);
  CHECK(cfg.agent.actor_hidden == std::vector<int>{64, 32});
  const json once = to_json(cfg);
  CHECK(to_json(run_config_from_json(once)) == once);
}

TEST_CASE("config errors name the key") {
  json doc = json::object();
  doc["env"]["bogus"] = 1;
  try {
    run_config_from_json(doc);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "env.bogus");
  }
  doc = json::object();
  doc["agent"]["gamma"] = "high";
  CHECK_THROWS_AS(run_config_from_json(doc), ConfigError);
  doc = json::object();
  doc["algo"] = "sac";
  CHECK_THROWS_AS(run_config_from_json(doc), ConfigError);
  doc = json::object();
  doc["env"]["w"] = 2.0;
  CHECK_THROWS_AS(run_config_from_json(doc), ConfigError);

  const fs::path dir = scratch("badcfg");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(read_config_file((dir / "bad.json").string()), ConfigError);
  CHECK_THROWS_AS(read_config_file((dir / "missing.json").string()), ConfigError);
}

TEST_CASE("overrides") {
  json doc = json::object();
  apply_override(doc, "env.w=0.0");
  apply_override(doc, "algo=ddpg");
  apply_override(doc, "channel.n_users=2");
  const RunConfig cfg = run_config_from_json(doc);
  CHECK(cfg.env.w == 0.0);
  CHECK(cfg.env.w1() == 0.0);
  CHECK(cfg.env.w2() == 1.0);
  CHECK(cfg.algo == Algo::ddpg);
  REQUIRE(cfg.env.lambda.size() == 2);
  CHECK(cfg.env.lambda[1] == doctest::Approx(1.0e6));
  CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), ConfigError);
}

TEST_CASE("metrics CSV") {
  std::ostringstream empty;
  write_metrics(empty, std::vector<EpisodeRecord>{});
  CHECK(empty.str() == std::string(kMetricsHeader) + "\n");

  auto recs = synthetic(Algo::td3, 4, 3, 0.0);
  std::swap(recs[0], recs[5]);  // output is sorted regardless of input order
  std::ostringstream out;
  write_metrics(out, recs);
  const auto lines = lines_of(out.str());
  REQUIRE(lines.size() == 13);
  CHECK(lines[0] == kMetricsHeader);
  CHECK(lines[1].rfind("1,1,td3,1,", 0) == 0);
  CHECK(lines[12].rfind("4,3,td3,1,", 0) == 0);

  const fs::path dir = scratch("metrics");
  fs::create_directories(dir);
  write_metrics((dir / "m.csv").string(), recs);
  const auto back = read_metrics((dir / "m.csv").string());
  REQUIRE(back.size() == 12);
  CHECK(back[0].episode == 1);
  CHECK(back[0].avg_reward == doctest::Approx(-4.99));
  CHECK(back[11].user == 3);
  CHECK(back[11].algo == Algo::td3);
}

TEST_CASE("summaries") {
  const auto d = synthetic(Algo::ddpg, 8, 3, 0.0);
  SUBCASE("identical runs tie") {
    auto t = d;
    for (auto& r : t) r.algo = Algo::td3;
    for (const auto& row : summarize(d, t, 0.25)) {
      CHECK(row.reward == Winner::none);
      CHECK(row.delay == Winner::none);
    }
  }
  SUBCASE("better TD3 wins") {
    const auto t = synthetic(Algo::td3, 8, 3, 1.0);
    const auto table = summarize(d, t, 0.25);
    REQUIRE(table.size() == 3);
    for (const auto& row : table) {
      CHECK(row.reward == Winner::td3);
      CHECK(row.power == Winner::td3);
      CHECK(row.delay == Winner::td3);
      CHECK(row.td3.reward - row.ddpg.reward == doctest::Approx(1.0));
      // episodes 7 and 8
      CHECK(row.ddpg.reward == doctest::Approx(-5.0 + 0.075));
    }
    const std::string text = format_comparison(table);
    CHECK(text.find('*') != std::string::npos);
  }
  SUBCASE("tail = 1 averages everything") {
    const auto means = tail_means(d, 1.0);
    CHECK(means[0].reward == doctest::Approx(-5.0 + 0.045));
  }
  SUBCASE("mismatched runs are rejected") {
    CHECK_THROWS_AS(summarize(d, synthetic(Algo::td3, 7, 3, 0.0), 0.25), std::invalid_argument);
    CHECK_THROWS_AS(summarize(d, synthetic(Algo::td3, 8, 2, 0.0), 0.25), std::invalid_argument);
  }
}

TEST_CASE("checkpoints") {
  AgentConfig cfg;
  cfg.actor_hidden = {16, 8};
  cfg.critic_hidden = {16, 8};
  const Eigen::Vector2d high(2.0, 2.0);
  for (const Algo algo : {Algo::ddpg, Algo::td3}) {
    Rng rng(3);
    const Agent agent = make_agent(algo, 10, high, cfg, rng);
    std::stringstream buf;
    save_checkpoint(buf, agent);
    const std::string bytes = buf.str();
    CHECK(bytes.rfind("MECRL1", 0) == 0);

    std::istringstream in(bytes);
    const Agent back = load_checkpoint(in, high, cfg);
    CHECK(back.algo == algo);
    CHECK(back.actor == agent.actor);
    CHECK(back.critic_targets.size() == agent.critic_targets.size());
    const Eigen::MatrixXd states = Eigen::MatrixXd::Random(10, 100);
    CHECK(predict(back.actor, states) == predict(agent.actor, states));
    CHECK(back.critics.back() == agent.critics.back());

    std::istringstream truncated(bytes.substr(0, bytes.size() - 5));
    CHECK_THROWS_AS(load_checkpoint(truncated, high, cfg), CorruptCheckpointError);
    std::string bad = bytes;
    bad[0] = 'X';
    std::istringstream magic(bad);
    CHECK_THROWS_AS(load_checkpoint(magic, high, cfg), CorruptCheckpointError);
    std::istringstream trailing(bytes + "x");
    CHECK_THROWS_AS(load_checkpoint(trailing, high, cfg), CorruptCheckpointError);
  }

  // a fresh agent is exactly what the same seed re-creates
  EnvConfig env;
  const auto a = make_agents(env, Algo::td3, cfg, 77);
  const auto b = make_agents(env, Algo::td3, cfg, 77);
  std::stringstream sa, sb;
  save_checkpoint(sa, a[1]);
  save_checkpoint(sb, b[1]);
  CHECK(sa.str() == sb.str());
}

TEST_CASE("CLI train writes outputs and is reproducible") {
  const fs::path a = scratch("cli_a");
  const fs::path b = scratch("cli_b");
  const auto base = with({"train", "--algo", "ddpg", "--episodes", "2", "--seed", "5"}, tiny_args());
  REQUIRE(cli_main(with(base, {"--out", a.string(), "--trace"})) == 0);
  REQUIRE(cli_main(with(base, {"--out", b.string()})) == 0);

  const auto rows = lines_of(slurp(a / "metrics.csv"));
  CHECK(rows.size() == 1 + 2 * 3);
  CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
  CHECK(fs::exists(a / "checkpoints" / "user3.ckpt"));
  CHECK(lines_of(slurp(a / "trace.csv")).size() == 1 + 2 * 5 * 3);
  CHECK_FALSE(fs::exists(b / "trace.csv"));
  const json written = json::parse(slurp(a / "config.json"));
  CHECK(written["seed"] == 5);
  CHECK(written["env"]["t_max"] == 5);

  SUBCASE("replay loads the checkpoints") {
    const fs::path r = scratch("cli_replay");
    REQUIRE(cli_main(with({"replay", "--checkpoint", (a / "checkpoints").string(), "--out", r.string()},
                          tiny_args())) == 0);
    CHECK(lines_of(slurp(r / "metrics.csv")).size() == 1 + 3);
  }
}

TEST_CASE("CLI seed falls back to MECRL_SEED") {
  const fs::path a = scratch("cli_env");
  ::setenv("MECRL_SEED", "9", 1);
  REQUIRE(cli_main(with({"train", "--episodes", "1", "--out", a.string()}, tiny_args())) == 0);
  ::unsetenv("MECRL_SEED");
  CHECK(json::parse(slurp(a / "config.json"))["seed"] == 9);
  CHECK(lines_of(slurp(a / "metrics.csv"))[1].rfind("1,1,td3,9,", 0) == 0);

  CliSettings s;
  CHECK(resolve_config(s).seed == 1);
  s.seed_given = true;
  s.seed = 4;
  ::setenv("MECRL_SEED", "9", 1);
  CHECK(resolve_config(s).seed == 4);
  ::setenv("MECRL_SEED", "nine", 1);
  s.seed_given = false;
  CHECK_THROWS_AS(resolve_config(s), ConfigError);
  ::unsetenv("MECRL_SEED");
}

TEST_CASE("CLI reports config errors with exit code 2") {
  CHECK(cli_main({"train", "--override", "env.nope=1", "--out", scratch("cli_bad").string()}) == 2);
}
