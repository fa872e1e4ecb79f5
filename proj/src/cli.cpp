// SPDX-License-Identifier: Apache-2.0

#include "mecrl/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mecrl/checkpoint.hpp"
#include "mecrl/errors.hpp"
#include "mecrl/validate.hpp"

namespace fs = std::filesystem;

namespace mecrl {

namespace {

std::uint64_t seed_from_env() {
  const char* raw = std::getenv("MECRL_SEED");
  if (raw == nullptr || *raw == '\0') return 1;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(raw, &used);
    if (used != std::string(raw).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("MECRL_SEED", std::string("not an unsigned integer: '") + raw + "'");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

std::string checkpoint_name(int user) { return "user" + std::to_string(user) + ".ckpt"; }

void print_tail(const std::vector<EpisodeRecord>& records, double tail, std::ostream& log) {
  for (const auto& s : tail_means(records, tail)) {
    log << "  user " << s.user << ": reward " << s.reward << ", power " << s.power << " W, delay " << s.delay
        << " kbit\n";
  }
}

}  // namespace

RunConfig resolve_config(const CliSettings& settings) {
  nlohmann::json doc = settings.config_path.empty() ? nlohmann::json::object()
                                                    : read_config_file(settings.config_path);
  for (const auto& o : settings.overrides) apply_override(doc, o);
  if (!settings.algo.empty()) doc["algo"] = settings.algo;
  if (!settings.out_dir.empty()) doc["out"] = settings.out_dir;
  if (settings.episodes >= 0) doc["episodes"] = settings.episodes;
  if (settings.trace) doc["trace"] = true;
  if (settings.seed_given) {
    doc["seed"] = settings.seed;
  } else if (!doc.contains("seed")) {
    doc["seed"] = seed_from_env();
  }
  return run_config_from_json(doc);
}

std::vector<EpisodeRecord> run_train(const RunConfig& cfg, std::ostream& log) {
  const fs::path out(cfg.out_dir);
  fs::create_directories(out / "checkpoints");
  write_text(out / "config.json", to_json(cfg).dump(2) + "\n");

  std::optional<TraceWriter> trace;
  TrainOptions opts;
  opts.episodes = cfg.episodes;
  opts.seed = cfg.seed;
  if (cfg.trace) {
    trace.emplace((out / "trace.csv").string());
    opts.on_step = [&trace](const StepTrace& row) { trace->write(row); };
  }
  log << to_string(cfg.algo) << " seed " << cfg.seed << ": " << cfg.episodes << " episodes x " << cfg.env.t_max
      << " steps, " << cfg.env.n_users() << " users\n";
  TrainResult result = train(cfg.env, cfg.algo, cfg.agent, opts);

  write_metrics((out / "metrics.csv").string(), result.records);
  for (std::size_t m = 0; m < result.agents.size(); ++m) {
    save_checkpoint(result.agents[m], (out / "checkpoints" / checkpoint_name(static_cast<int>(m) + 1)).string());
  }
  if (!result.records.empty()) print_tail(result.records, cfg.tail, log);
  return result.records;
}

std::vector<SeedComparison> run_compare(const RunConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                        std::ostream& log) {
  std::vector<SeedComparison> out;
  std::ostringstream summary;
  for (const std::uint64_t seed : seeds) {
    std::vector<EpisodeRecord> runs[2];
    for (const Algo algo : {Algo::ddpg, Algo::td3}) {
      RunConfig run = cfg;
      run.algo = algo;
      run.seed = seed;
      run.out_dir = (fs::path(cfg.out_dir) / ("seed_" + std::to_string(seed)) / to_string(algo)).string();
      runs[algo == Algo::td3 ? 1 : 0] = run_train(run, log);
    }
    SeedComparison cmp{seed, summarize(runs[0], runs[1], cfg.tail)};
    summary << "seed " << seed << " (final " << cfg.tail * 100.0 << "% of " << cfg.episodes << " episodes)\n"
            << format_comparison(cmp.table) << '\n';
    out.push_back(std::move(cmp));
  }
  fs::create_directories(cfg.out_dir);
  write_text(fs::path(cfg.out_dir) / "summary.txt", summary.str());
  log << summary.str();
  return out;
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Decentralized DDPG/TD3 power allocation for multi-user MEC offloading"};
  app.require_subcommand(1);

  CliSettings settings;
  std::vector<std::uint64_t> seeds;
  std::string checkpoint_dir;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", settings.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--override", settings.overrides, "dotted key=value, repeatable");
    sub->add_option("--episodes", settings.episodes, "number of episodes")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", settings.out_dir, "output directory");
    sub->add_option("--seed", settings.seed, "run seed (falls back to MECRL_SEED)");
    sub->add_flag("--trace", settings.trace, "also write per-step trace.csv");
  };

  auto* train_cmd = app.add_subcommand("train", "train one algorithm");
  add_common(train_cmd);
  train_cmd->add_option("--algo", settings.algo, "ddpg or td3")->check(CLI::IsMember({"ddpg", "td3"}));

  auto* compare_cmd = app.add_subcommand("compare", "train DDPG and TD3 on shared seeds and summarize");
  add_common(compare_cmd);
  compare_cmd->add_option("--seeds", seeds, "several seeds, e.g. --seeds 1 2 3");

  auto* validate_cmd = app.add_subcommand("validate", "run the built-in invariant and oracle checks");

  auto* replay_cmd = app.add_subcommand("replay", "evaluate saved checkpoints greedily");
  add_common(replay_cmd);
  replay_cmd->add_option("--checkpoint", checkpoint_dir, "directory holding user<m>.ckpt files")
      ->required()
      ->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    for (auto* sub : {train_cmd, compare_cmd, replay_cmd}) {
      if (sub->parsed() && sub->count("--seed") > 0) settings.seed_given = true;
    }

    if (validate_cmd->parsed()) {
      bool all = true;
      for (const auto& r : run_validation_suite()) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
        all = all && r.passed;
      }
      return all ? 0 : 1;
    }

    if (train_cmd->parsed()) {
      run_train(resolve_config(settings), std::cout);
      return 0;
    }

    if (compare_cmd->parsed()) {
      const RunConfig cfg = resolve_config(settings);
      if (seeds.empty()) seeds.push_back(cfg.seed);
      run_compare(cfg, seeds, std::cout);
      return 0;
    }

    if (replay_cmd->parsed()) {
      if (settings.episodes < 0) settings.episodes = 1;
      RunConfig cfg = resolve_config(settings);
      if (settings.out_dir.empty()) cfg.out_dir = (fs::path(checkpoint_dir) / "replay").string();
      const Eigen::Vector2d high(cfg.env.p_l_max, cfg.env.p_o_max);
      std::vector<Agent> agents;
      for (int m = 1; m <= cfg.env.n_users(); ++m) {
        agents.push_back(load_checkpoint((fs::path(checkpoint_dir) / checkpoint_name(m)).string(), high, cfg.agent));
      }
      if (agents.front().state_dim() != cfg.env.state_dim()) {
        throw CorruptCheckpointError("checkpoint state dimension does not match the configured antenna count");
      }
      TrainOptions opts;
      opts.episodes = cfg.episodes;
      opts.seed = cfg.seed;
      opts.explore = false;
      opts.learn = false;
      const TrainResult result = run_agents(cfg.env, std::move(agents), cfg.agent, opts);
      fs::create_directories(cfg.out_dir);
      write_metrics((fs::path(cfg.out_dir) / "metrics.csv").string(), result.records);
      std::cout << "greedy replay, " << cfg.episodes << " episodes:\n";
      print_tail(result.records, 1.0, std::cout);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

int cli_main(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"mecrl"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace mecrl
