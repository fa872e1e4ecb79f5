// SPDX-License-Identifier: Apache-2.0

#include "mecrl/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>

#include "mecrl/errors.hpp"

namespace mecrl {

using nlohmann::json;

void RunConfig::validate() const {
  try {
    env.validate();
    agent.validate();
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    throw ConfigError(what.substr(0, what.find(' ')), what);
  }
  if (episodes < 0) throw ConfigError("episodes", "must be >= 0");
  if (!(tail > 0.0 && tail <= 1.0)) throw ConfigError("tail", "must lie in (0, 1]");
}

json to_json(const RunConfig& cfg) {
  const auto& c = cfg.env.channel;
  const auto& e = cfg.env;
  const auto& a = cfg.agent;
  return json{
      {"algo", to_string(cfg.algo)},
      {"seed", cfg.seed},
      {"episodes", cfg.episodes},
      {"out", cfg.out_dir},
      {"trace", cfg.trace},
      {"tail", cfg.tail},
      {"channel",
       {{"n_antennas", c.n_antennas},
        {"n_users", c.n_users},
        {"h0", c.h0},
        {"d0", c.d0},
        {"alpha", c.alpha},
        {"rho", c.rho},
        {"tau0", c.tau0},
        {"fd", c.fd},
        {"sigma_r2", c.sigma_r2}}},
      {"env",
       {{"lambda", e.lambda},
        {"p_l_max", e.p_l_max},
        {"p_o_max", e.p_o_max},
        {"kappa", e.kappa},
        {"cycles_per_bit", e.cycles_per_bit},
        {"bandwidth", e.bandwidth},
        {"w", e.w},
        {"t_max", e.t_max},
        {"base_distance", e.base_distance}}},
      {"agent",
       {{"gamma", a.gamma},
        {"tau", a.tau},
        {"batch_size", a.batch_size},
        {"warmup", a.warmup},
        {"updates_per_step", a.updates_per_step},
        {"actor_lr", a.actor_lr},
        {"critic_lr", a.critic_lr},
        {"actor_hidden", a.actor_hidden},
        {"critic_hidden", a.critic_hidden},
        {"ou_theta", a.ou_theta},
        {"ou_sigma", a.ou_sigma},
        {"buffer_capacity", a.buffer_capacity},
        {"target_noise", a.target_noise},
        {"noise_clip", a.noise_clip},
        {"update_every", a.update_every}}},
  };
}

namespace {

using Setter = std::function<void(const json&, const std::string&)>;

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(key, "expected a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(key, "expected a string");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
          throw ConfigError(key, "expected a non-negative integer");
        }
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(key, "expected a number");
    }
    return v.get<T>();
  } catch (const json::exception& ex) {
    throw ConfigError(key, ex.what());
  }
}

template <typename T>
Setter field(T& target) {
  return [&target](const json& v, const std::string& key) { target = get_as<T>(v, key); };
}

template <typename T>
Setter list_field(std::vector<T>& target) {
  return [&target](const json& v, const std::string& key) {
    if (!v.is_array()) throw ConfigError(key, "expected an array");
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_as<T>(v[i], key + "[" + std::to_string(i) + "]"));
    target = std::move(out);
  };
}

void apply_section(const json& doc, const std::string& prefix, const std::map<std::string, Setter>& fields) {
  if (!doc.is_object()) throw ConfigError(prefix, "expected an object");
  for (const auto& [key, value] : doc.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    const auto it = fields.find(key);
    if (it == fields.end()) throw ConfigError(path, "unknown key");
    it->second(value, path);
  }
}

}  // namespace

RunConfig run_config_from_json(const json& doc) {
  RunConfig cfg;
  auto& c = cfg.env.channel;
  auto& e = cfg.env;
  auto& a = cfg.agent;
  std::string algo_name = to_string(cfg.algo);

  const std::map<std::string, Setter> channel_fields{
      {"n_antennas", field(c.n_antennas)}, {"n_users", field(c.n_users)}, {"h0", field(c.h0)},
      {"d0", field(c.d0)},                 {"alpha", field(c.alpha)},     {"rho", field(c.rho)},
      {"tau0", field(c.tau0)},             {"fd", field(c.fd)},           {"sigma_r2", field(c.sigma_r2)}};
  const std::map<std::string, Setter> env_fields{{"lambda", list_field(e.lambda)},
                                                 {"p_l_max", field(e.p_l_max)},
                                                 {"p_o_max", field(e.p_o_max)},
                                                 {"kappa", field(e.kappa)},
                                                 {"cycles_per_bit", field(e.cycles_per_bit)},
                                                 {"bandwidth", field(e.bandwidth)},
                                                 {"w", field(e.w)},
                                                 {"t_max", field(e.t_max)},
                                                 {"base_distance", field(e.base_distance)}};
  const std::map<std::string, Setter> agent_fields{{"gamma", field(a.gamma)},
                                                   {"tau", field(a.tau)},
                                                   {"batch_size", field(a.batch_size)},
                                                   {"warmup", field(a.warmup)},
                                                   {"updates_per_step", field(a.updates_per_step)},
                                                   {"actor_lr", field(a.actor_lr)},
                                                   {"critic_lr", field(a.critic_lr)},
                                                   {"actor_hidden", list_field(a.actor_hidden)},
                                                   {"critic_hidden", list_field(a.critic_hidden)},
                                                   {"ou_theta", field(a.ou_theta)},
                                                   {"ou_sigma", field(a.ou_sigma)},
                                                   {"buffer_capacity", field(a.buffer_capacity)},
                                                   {"target_noise", field(a.target_noise)},
                                                   {"noise_clip", field(a.noise_clip)},
                                                   {"update_every", field(a.update_every)}};
  const std::map<std::string, Setter> top_fields{
      {"algo", field(algo_name)},
      {"seed", field(cfg.seed)},
      {"episodes", field(cfg.episodes)},
      {"out", field(cfg.out_dir)},
      {"trace", field(cfg.trace)},
      {"tail", field(cfg.tail)},
      {"channel", [&](const json& v, const std::string& p) { apply_section(v, p, channel_fields); }},
      {"env", [&](const json& v, const std::string& p) { apply_section(v, p, env_fields); }},
      {"agent", [&](const json& v, const std::string& p) { apply_section(v, p, agent_fields); }}};

  apply_section(doc, "", top_fields);

  try {
    cfg.algo = parse_algo(algo_name);
  } catch (const std::invalid_argument& ex) {
    throw ConfigError("algo", ex.what());
  }
  const bool users_given = doc.contains("channel") && doc["channel"].contains("n_users");
  const bool lambda_given = doc.contains("env") && doc["env"].contains("lambda");
  if (users_given && !lambda_given) {
    e.lambda.clear();
    for (int m = 1; m <= c.n_users; ++m) e.lambda.push_back(default_arrival_rate(m));
  }
  cfg.validate();
  return cfg;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(assignment, "override must look like key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError(key, "empty path component");
    if (!node->is_object()) throw ConfigError(key, "path does not name an object");
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("", "malformed JSON in '" + path + "'");
  return doc;
}

}  // namespace mecrl
