// SPDX-License-Identifier: Apache-2.0

#include "mecrl/neural.hpp"

#include <cmath>
#include <stdexcept>

namespace mecrl {

Mlp::Mlp(std::vector<DenseLayer> layers, OutputActivation output)
    : layers_(std::move(layers)), output_(output) {
  if (layers_.empty()) throw std::invalid_argument("Mlp: at least one layer required");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].bias.size() != layers_[i].weight.rows()) {
      throw std::invalid_argument("Mlp: bias length must equal layer output width");
    }
    if (i > 0 && layers_[i].weight.cols() != layers_[i - 1].weight.rows()) {
      throw std::invalid_argument("Mlp: consecutive layer dims do not chain");
    }
  }
}

std::vector<int> Mlp::dims() const {
  std::vector<int> d;
  if (layers_.empty()) return d;
  d.push_back(static_cast<int>(layers_.front().weight.cols()));
  for (const auto& l : layers_) d.push_back(static_cast<int>(l.weight.rows()));
  return d;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (a.output_ != b.output_ || a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    const auto& la = a.layers_[i];
    const auto& lb = b.layers_[i];
    if (la.weight.rows() != lb.weight.rows() || la.weight.cols() != lb.weight.cols()) return false;
    if (la.weight != lb.weight || la.bias != lb.bias) return false;
  }
  return true;
}

Mlp mlp_init(const std::vector<int>& dims, OutputActivation output, Rng& rng) {
  if (dims.size() < 2) throw std::invalid_argument("mlp_init: at least two dims required");
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    if (dims[i] < 1 || dims[i + 1] < 1) throw std::invalid_argument("mlp_init: dims must be positive");
    const bool last = i + 2 == dims.size();
    const double bound = last ? 3e-3 : 1.0 / std::sqrt(static_cast<double>(dims[i]));
    std::uniform_real_distribution<double> u(-bound, bound);
    DenseLayer l{Eigen::MatrixXd(dims[i + 1], dims[i]), Eigen::VectorXd(dims[i + 1])};
    for (Eigen::Index c = 0; c < l.weight.cols(); ++c)
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r) l.weight(r, c) = u(rng);
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias[r] = u(rng);
    layers.push_back(std::move(l));
  }
  return Mlp(std::move(layers), output);
}

namespace {

void check_input(const Mlp& net, const Eigen::MatrixXd& x) {
  if (net.layers().empty()) throw std::invalid_argument("forward: empty network");
  if (x.rows() != net.input_dim()) throw std::invalid_argument("forward: input dimension mismatch");
}

}  // namespace

Eigen::MatrixXd predict(const Mlp& net, const Eigen::MatrixXd& x) {
  check_input(net, x);
  const auto& layers = net.layers();
  Eigen::MatrixXd a = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Eigen::MatrixXd z = layers[i].weight * a;
    z.colwise() += layers[i].bias;
    if (i + 1 < layers.size()) {
      a = z.cwiseMax(0.0);
    } else {
      a = net.output_activation() == OutputActivation::tanh ? Eigen::MatrixXd(z.array().tanh()) : z;
    }
  }
  return a;
}

ForwardCache forward(const Mlp& net, const Eigen::MatrixXd& x) {
  check_input(net, x);
  const auto& layers = net.layers();
  ForwardCache cache;
  cache.net = &net;
  cache.revision = net.revision();
  cache.inputs.reserve(layers.size());
  cache.pre.reserve(layers.size());
  Eigen::MatrixXd a = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Eigen::MatrixXd z = layers[i].weight * a;
    z.colwise() += layers[i].bias;
    cache.inputs.push_back(std::move(a));
    if (i + 1 < layers.size()) {
      a = z.cwiseMax(0.0);
    } else {
      a = net.output_activation() == OutputActivation::tanh ? Eigen::MatrixXd(z.array().tanh()) : z;
    }
    cache.pre.push_back(std::move(z));
  }
  cache.output = std::move(a);
  return cache;
}

BackwardResult backward(const Mlp& net, const ForwardCache& cache, const Eigen::MatrixXd& grad_y) {
  if (cache.net != &net || cache.revision != net.revision()) {
    throw std::logic_error("backward: stale or foreign forward cache");
  }
  if (grad_y.rows() != cache.output.rows() || grad_y.cols() != cache.output.cols()) {
    throw std::invalid_argument("backward: grad_y shape does not match the forward output");
  }
  const auto& layers = net.layers();
  const std::size_t n = layers.size();
  BackwardResult out;
  out.grads.weight.resize(n);
  out.grads.bias.resize(n);

  Eigen::MatrixXd delta;
  if (net.output_activation() == OutputActivation::tanh) {
    delta = grad_y.array() * (1.0 - cache.output.array().square());
  } else {
    delta = grad_y;
  }
  for (std::size_t k = n; k-- > 0;) {
    out.grads.weight[k].noalias() = delta * cache.inputs[k].transpose();
    out.grads.bias[k] = delta.rowwise().sum();
    Eigen::MatrixXd upstream = layers[k].weight.transpose() * delta;
    if (k > 0) {
      delta = (cache.pre[k - 1].array() > 0.0).select(upstream, 0.0);
    } else {
      out.grad_x = std::move(upstream);
    }
  }
  return out;
}

AdamState::AdamState(const Mlp& net, AdamConfig config) : cfg(config) {
  for (const auto& l : net.layers()) {
    m.weight.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    m.bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
  v = m;
}

void opt_step(Mlp& net, const MlpGrads& grads, AdamState& opt) {
  auto& layers = net.mutable_layers();
  if (grads.weight.size() != layers.size() || opt.m.weight.size() != layers.size()) {
    throw std::invalid_argument("opt_step: gradient/optimizer shape mismatch");
  }
  ++opt.step;
  const double b1 = opt.cfg.beta1;
  const double b2 = opt.cfg.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(opt.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(opt.step));
  const double lr = opt.cfg.lr;
  const double eps = opt.cfg.eps;

  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    update(layers[i].weight, grads.weight[i], opt.m.weight[i], opt.v.weight[i]);
    update(layers[i].bias, grads.bias[i], opt.m.bias[i], opt.v.bias[i]);
  }
}

void soft_update(Mlp& target, const Mlp& main, double tau) {
  if (target.dims() != main.dims()) throw std::invalid_argument("soft_update: shape mismatch");
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("soft_update: tau must lie in [0, 1]");
  auto& dst = target.mutable_layers();
  const auto& src = main.layers();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i].weight = tau * src[i].weight + (1.0 - tau) * dst[i].weight;
    dst[i].bias = tau * src[i].bias + (1.0 - tau) * dst[i].bias;
  }
}

Eigen::VectorXd flatten_parameters(const Mlp& net) {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(net.parameter_count()));
  Eigen::Index at = 0;
  for (const auto& l : net.layers()) {
    flat.segment(at, l.weight.size()) = l.weight.reshaped();
    at += l.weight.size();
    flat.segment(at, l.bias.size()) = l.bias;
    at += l.bias.size();
  }
  return flat;
}

void assign_parameters(Mlp& net, const Eigen::VectorXd& flat) {
  if (flat.size() != static_cast<Eigen::Index>(net.parameter_count())) {
    throw std::invalid_argument("assign_parameters: length mismatch");
  }
  Eigen::Index at = 0;
  for (auto& l : net.mutable_layers()) {
    l.weight.reshaped() = flat.segment(at, l.weight.size());
    at += l.weight.size();
    l.bias = flat.segment(at, l.bias.size());
    at += l.bias.size();
  }
}

Eigen::VectorXd flatten_grads(const MlpGrads& grads) {
  Eigen::Index total = 0;
  for (std::size_t i = 0; i < grads.weight.size(); ++i) total += grads.weight[i].size() + grads.bias[i].size();
  Eigen::VectorXd flat(total);
  Eigen::Index at = 0;
  for (std::size_t i = 0; i < grads.weight.size(); ++i) {
    flat.segment(at, grads.weight[i].size()) = grads.weight[i].reshaped();
    at += grads.weight[i].size();
    flat.segment(at, grads.bias[i].size()) = grads.bias[i];
    at += grads.bias[i].size();
  }
  return flat;
}

}  // namespace mecrl
