// SPDX-License-Identifier: Apache-2.0

#include "mecrl/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mecrl {

void ChannelParams::validate() const {
  if (n_users < 1) throw std::invalid_argument("channel.n_users must be >= 1");
  if (n_antennas <= n_users) {
    throw std::invalid_argument("channel.n_antennas must exceed channel.n_users");
  }
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("channel.rho must lie in [0, 1]");
  if (!(h0 > 0.0 && d0 > 0.0 && alpha > 0.0 && tau0 > 0.0 && fd > 0.0 && sigma_r2 > 0.0)) {
    throw std::invalid_argument("channel: physical quantities must be positive");
  }
}

double ChannelParams::path_gain(double distance) const {
  return h0 * std::pow(d0 / distance, alpha);
}

UserChannel init_channel(const ChannelParams& params, double distance, Rng& rng) {
  if (!(distance > 0.0)) throw std::invalid_argument("init_channel: distance must be > 0");
  UserChannel ch;
  ch.h = sample_complex_gaussian<double>(static_cast<std::size_t>(params.n_antennas),
                                         params.path_gain(distance), rng);
  ch.distance = distance;
  ch.base_distance = distance;
  ch.cumulative_offset = 0.0;
  return ch;
}

UserChannel evolve_channel(const UserChannel& ch, const ChannelParams& params, Rng& rng) {
  UserChannel next = ch;
  const auto innovation = sample_complex_gaussian<double>(static_cast<std::size_t>(ch.h.size()),
                                                          params.path_gain(ch.distance), rng);
  next.h = params.rho * ch.h + std::sqrt(1.0 - params.rho * params.rho) * innovation;
  return next;
}

UserChannel apply_mobility(const UserChannel& ch, double delta) {
  UserChannel next = ch;
  next.cumulative_offset =
      std::clamp(ch.cumulative_offset + delta, -kMaxMobilityOffset, kMaxMobilityOffset);
  next.distance = next.base_distance + next.cumulative_offset;
  return next;
}

UserChannel step_mobility(const UserChannel& ch, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  return apply_mobility(ch, normal(rng));
}

ComplexMatd stack_channels(std::span<const UserChannel> channels) {
  if (channels.empty()) throw std::invalid_argument("stack_channels: no users");
  const Eigen::Index n = channels.front().h.size();
  ComplexMatd h(n, static_cast<Eigen::Index>(channels.size()));
  for (std::size_t m = 0; m < channels.size(); ++m) {
    if (channels[m].h.size() != n) {
      throw std::invalid_argument("stack_channels: channel vectors differ in length");
    }
    h.col(static_cast<Eigen::Index>(m)) = channels[m].h;
  }
  return h;
}

ZfReport compute_zf(std::span<const UserChannel> channels, std::span<const double> p_o,
                    const ChannelParams& params) {
  if (channels.size() != p_o.size()) {
    throw std::invalid_argument("compute_zf: one offload power per user required");
  }
  const ComplexMatd h = stack_channels(channels);
  const Eigen::VectorXd diag = zf_diag(h);

  ZfReport report;
  report.gamma.resize(diag.size());
  report.phi.resize(diag.size());
  for (Eigen::Index m = 0; m < diag.size(); ++m) {
    const double power = p_o[static_cast<std::size_t>(m)];
    if (!(power >= 0.0)) throw std::invalid_argument("compute_zf: negative offload power");
    report.gamma[m] = power / (params.sigma_r2 * diag[m]);
    // Cauchy-Schwarz bounds this by 1; clamp the last-ulp excursions.
    report.phi[m] = std::min(1.0, 1.0 / (diag[m] * h.col(m).squaredNorm()));
  }
  return report;
}

}  // namespace mecrl
