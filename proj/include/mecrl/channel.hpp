// SPDX-License-Identifier: Apache-2.0
//
// Per-user Gauss-Markov block fading, bounded random-walk mobility and the
// zero-forcing quantities (post-detection SINR and power ratio) that couple
// the users of one uplink.

#pragma once

#include <span>

#include <Eigen/Dense>

#include "mecrl/numerics.hpp"

namespace mecrl {

struct ChannelParams {
  int n_antennas = 4;
  int n_users = 3;
  double h0 = 1e-3;  // path-loss constant at d0, linear (-30 dB)
  double d0 = 1.0;   // m
  double alpha = 3.0;
  double rho = 0.95;
  double tau0 = 1e-3;  // s
  double fd = 70.0;    // Hz
  double sigma_r2 = 1e-9;  // W

  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;

  /// Large-scale gain h0 (d0 / d)^alpha, the per-entry channel variance.
  double path_gain(double distance) const;
};

/// Cumulative mobility offsets stay within +/- this many metres.
inline constexpr double kMaxMobilityOffset = 10.0;

struct UserChannel {
  ComplexVecd h;
  double distance = 0.0;
  double cumulative_offset = 0.0;
  double base_distance = 0.0;
};

struct ZfReport {
  Eigen::VectorXd gamma;  // post-ZF SINR per user
  Eigen::VectorXd phi;    // estimated power ratio per user
};

/// h(0) ~ CN(0, h0 (d0/d)^alpha I_N) at the given distance.
UserChannel init_channel(const ChannelParams& params, double distance, Rng& rng);

/// One Gauss-Markov step h <- rho h + sqrt(1 - rho^2) e with the innovation
/// scaled by the user's current distance.
UserChannel evolve_channel(const UserChannel& ch, const ChannelParams& params, Rng& rng);

/// Adds `delta` metres to the cumulative offset, clamped to +/-10 m.
UserChannel apply_mobility(const UserChannel& ch, double delta);

/// apply_mobility with delta ~ N(0, 1).
UserChannel step_mobility(const UserChannel& ch, Rng& rng);

/// Stacks the channels as columns of H (N x M).
ComplexMatd stack_channels(std::span<const UserChannel> channels);

/// gamma_m = p_o[m] / (sigma_R^2 [(H^H H)^{-1}]_mm),
/// phi_m   = 1 / ([(H^H H)^{-1}]_mm ||h_m||^2).
ZfReport compute_zf(std::span<const UserChannel> channels, std::span<const double> p_o,
                    const ChannelParams& params);

}  // namespace mecrl
