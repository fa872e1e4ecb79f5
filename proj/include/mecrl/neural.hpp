// SPDX-License-Identifier: Apache-2.0
//
// Dense feed-forward networks with hand-written reverse mode, Adam and
// Polyak averaging. Batches are column-major: one sample per column.

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mecrl/numerics.hpp"

namespace mecrl {

enum class OutputActivation : std::uint8_t { identity = 0, tanh = 1 };

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// ReLU hidden layers, identity or tanh on the last layer.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<DenseLayer> layers, OutputActivation output);

  std::vector<int> dims() const;
  int input_dim() const { return static_cast<int>(layers_.front().weight.cols()); }
  int output_dim() const { return static_cast<int>(layers_.back().weight.rows()); }
  std::size_t parameter_count() const;
  OutputActivation output_activation() const { return output_; }

  const std::vector<DenseLayer>& layers() const { return layers_; }
  /// Mutable access; invalidates outstanding forward caches.
  std::vector<DenseLayer>& mutable_layers() {
    ++revision_;
    return layers_;
  }
  std::uint64_t revision() const { return revision_; }

  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  std::vector<DenseLayer> layers_;
  OutputActivation output_ = OutputActivation::identity;
  std::uint64_t revision_ = 0;
};

struct MlpGrads {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
};

struct ForwardCache {
  const Mlp* net = nullptr;
  std::uint64_t revision = 0;
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
  Eigen::MatrixXd output;
};

struct BackwardResult {
  MlpGrads grads;          // summed over the batch columns
  Eigen::MatrixXd grad_x;  // d objective / d input, one column per sample
};

/// Hidden layers ~ U(+-1/sqrt(fan_in)); final layer ~ U(+-3e-3).
Mlp mlp_init(const std::vector<int>& dims, OutputActivation output, Rng& rng);

/// Output only, no cache.
Eigen::MatrixXd predict(const Mlp& net, const Eigen::MatrixXd& x);

ForwardCache forward(const Mlp& net, const Eigen::MatrixXd& x);

/// Throws std::logic_error if `cache` was produced by another network or
/// before the network was modified.
BackwardResult backward(const Mlp& net, const ForwardCache& cache, const Eigen::MatrixXd& grad_y);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  MlpGrads m;
  MlpGrads v;
  std::int64_t step = 0;

  AdamState() = default;
  AdamState(const Mlp& net, AdamConfig config);
};

/// Bias-corrected Adam descent step on `net` using `grads`.
void opt_step(Mlp& net, const MlpGrads& grads, AdamState& opt);

/// target <- tau main + (1 - tau) target.
void soft_update(Mlp& target, const Mlp& main, double tau);

/// Flat parameter views, layer by layer: weights column-major then biases.
Eigen::VectorXd flatten_parameters(const Mlp& net);
void assign_parameters(Mlp& net, const Eigen::VectorXd& flat);
Eigen::VectorXd flatten_grads(const MlpGrads& grads);

}  // namespace mecrl
