// SPDX-License-Identifier: Apache-2.0

#include "mecrl/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <system_error>

#include "mecrl/errors.hpp"

namespace mecrl {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(b.data(), b.size());
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  out.write(b.data(), b.size());
}

void read_exact(std::istream& in, char* dst, std::size_t n) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw CorruptCheckpointError("checkpoint: truncated file");
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  read_exact(in, reinterpret_cast<char*>(b.data()), b.size());
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  read_exact(in, reinterpret_cast<char*>(b.data()), b.size());
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
  return std::bit_cast<double>(v);
}

std::vector<const Mlp*> networks_of(const Agent& agent) {
  std::vector<const Mlp*> nets{&agent.actor};
  for (const auto& c : agent.critics) nets.push_back(&c);
  nets.push_back(&agent.actor_target);
  for (const auto& c : agent.critic_targets) nets.push_back(&c);
  return nets;
}

Mlp read_network(std::istream& in, const std::vector<int>& dims, OutputActivation act) {
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    DenseLayer l{Eigen::MatrixXd(dims[i + 1], dims[i]), Eigen::VectorXd(dims[i + 1])};
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = get_f64(in);
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias[r] = get_f64(in);
    layers.push_back(std::move(l));
  }
  return Mlp(std::move(layers), act);
}

}  // namespace

void save_checkpoint(std::ostream& out, const Agent& agent) {
  out.write(kCheckpointMagic, 6);
  const std::string tag = to_string(agent.algo);
  out.put(static_cast<char>(tag.size()));
  out.write(tag.data(), static_cast<std::streamsize>(tag.size()));
  const auto nets = networks_of(agent);
  put_u32(out, static_cast<std::uint32_t>(nets.size()));
  for (const Mlp* net : nets) {
    const auto dims = net->dims();
    put_u32(out, static_cast<std::uint32_t>(dims.size()));
    for (int d : dims) put_u32(out, static_cast<std::uint32_t>(d));
  }
  for (const Mlp* net : nets) {
    for (const auto& l : net->layers()) {
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
        for (Eigen::Index c = 0; c < l.weight.cols(); ++c) put_f64(out, l.weight(r, c));
      for (Eigen::Index r = 0; r < l.bias.size(); ++r) put_f64(out, l.bias[r]);
    }
  }
}

void save_checkpoint(const Agent& agent, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::system_error(errno, std::generic_category(), "cannot write checkpoint '" + path + "'");
  save_checkpoint(out, agent);
  out.flush();
  if (!out) throw std::system_error(errno, std::generic_category(), "write failed for '" + path + "'");
}

Agent load_checkpoint(std::istream& in, const Eigen::VectorXd& action_high, const AgentConfig& cfg) {
  std::array<char, 6> magic{};
  read_exact(in, magic.data(), magic.size());
  if (std::memcmp(magic.data(), kCheckpointMagic, 6) != 0) throw CorruptCheckpointError("checkpoint: bad magic");

  char tag_len = 0;
  read_exact(in, &tag_len, 1);
  std::string tag(static_cast<std::size_t>(static_cast<unsigned char>(tag_len)), '\0');
  read_exact(in, tag.data(), tag.size());
  Algo algo{};
  try {
    algo = parse_algo(tag);
  } catch (const std::invalid_argument&) {
    throw CorruptCheckpointError("checkpoint: unknown algorithm tag '" + tag + "'");
  }

  const std::uint32_t n_critics = algo == Algo::td3 ? 2 : 1;
  const std::uint32_t count = get_u32(in);
  if (count != 2 * (1 + n_critics)) throw CorruptCheckpointError("checkpoint: network count does not match tag");

  std::vector<std::vector<int>> dims(count);
  for (auto& d : dims) {
    const std::uint32_t n = get_u32(in);
    if (n < 2 || n > 64) throw CorruptCheckpointError("checkpoint: implausible layer count");
    for (std::uint32_t i = 0; i < n; ++i) {
      const std::uint32_t v = get_u32(in);
      if (v == 0 || v > (1u << 20)) throw CorruptCheckpointError("checkpoint: implausible layer width");
      d.push_back(static_cast<int>(v));
    }
  }
  const auto& actor_dims = dims[0];
  const auto& critic_dims = dims[1];
  if (actor_dims.back() != action_high.size()) throw CorruptCheckpointError("checkpoint: action dimension mismatch");
  if (critic_dims.front() != actor_dims.front() + actor_dims.back() || critic_dims.back() != 1) {
    throw CorruptCheckpointError("checkpoint: critic dims inconsistent with actor");
  }
  for (std::uint32_t i = 1; i <= n_critics; ++i) {
    if (dims[i] != critic_dims || dims[n_critics + 1 + i] != critic_dims) {
      throw CorruptCheckpointError("checkpoint: critic dims differ");
    }
  }
  if (dims[n_critics + 1] != actor_dims) throw CorruptCheckpointError("checkpoint: target actor dims differ");

  Agent agent;
  agent.algo = algo;
  agent.action_low = Eigen::VectorXd::Zero(action_high.size());
  agent.action_high = action_high;
  agent.actor = read_network(in, actor_dims, OutputActivation::tanh);
  for (std::uint32_t i = 0; i < n_critics; ++i) {
    agent.critics.push_back(read_network(in, critic_dims, OutputActivation::identity));
  }
  agent.actor_target = read_network(in, actor_dims, OutputActivation::tanh);
  for (std::uint32_t i = 0; i < n_critics; ++i) {
    agent.critic_targets.push_back(read_network(in, critic_dims, OutputActivation::identity));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw CorruptCheckpointError("checkpoint: trailing bytes");

  agent.actor_opt = AdamState(agent.actor, AdamConfig{cfg.actor_lr});
  for (const auto& c : agent.critics) agent.critic_opts.emplace_back(c, AdamConfig{cfg.critic_lr});
  return agent;
}

Agent load_checkpoint(const std::string& path, const Eigen::VectorXd& action_high, const AgentConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::system_error(errno, std::generic_category(), "cannot read checkpoint '" + path + "'");
  return load_checkpoint(in, action_high, cfg);
}

}  // namespace mecrl
