// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <stdexcept>

#include "mecrl/rl.hpp"

namespace mecrl {

Batch make_batch(const std::vector<Transition>& items) {
  if (items.empty()) throw std::invalid_argument("make_batch: empty batch");
  const auto k = static_cast<Eigen::Index>(items.size());
  const Eigen::Index sd = items.front().s.size();
  const Eigen::Index ad = items.front().a.size();
  Batch b{Eigen::MatrixXd(sd, k), Eigen::MatrixXd(ad, k), Eigen::VectorXd(k), Eigen::MatrixXd(sd, k),
          Eigen::VectorXd(k)};
  for (Eigen::Index i = 0; i < k; ++i) {
    const Transition& t = items[static_cast<std::size_t>(i)];
    b.s.col(i) = t.s;
    b.a.col(i) = t.a;
    b.r[i] = t.r;
    b.s_next.col(i) = t.s_next;
    b.done[i] = t.done ? 1.0 : 0.0;
  }
  return b;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
    return;
  }
  items_[cursor_] = std::move(t);
  cursor_ = (cursor_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw std::out_of_range("ReplayBuffer::at");
  return items_[(cursor_ + i) % items_.size()];
}

void ReplayBuffer::clear() {
  items_.clear();
  cursor_ = 0;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t k, Rng& rng) const {
  if (k == 0 || items_.size() < k) {
    throw std::logic_error("ReplayBuffer::sample: not enough stored transitions");
  }
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<std::size_t> idx(k);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

Batch ReplayBuffer::sample(std::size_t k, Rng& rng) const {
  const auto idx = sample_indices(k, rng);
  const auto& first = items_.front();
  const auto n = static_cast<Eigen::Index>(k);
  Batch b{Eigen::MatrixXd(first.s.size(), n), Eigen::MatrixXd(first.a.size(), n), Eigen::VectorXd(n),
          Eigen::MatrixXd(first.s.size(), n), Eigen::VectorXd(n)};
  for (Eigen::Index c = 0; c < n; ++c) {
    const Transition& t = items_[idx[static_cast<std::size_t>(c)]];
    b.s.col(c) = t.s;
    b.a.col(c) = t.a;
    b.r[c] = t.r;
    b.s_next.col(c) = t.s_next;
    b.done[c] = t.done ? 1.0 : 0.0;
  }
  return b;
}

OuNoise::OuNoise(int dim, double theta, double sigma)
    : theta_(theta), sigma_(sigma), x_(Eigen::VectorXd::Zero(dim)) {}

const Eigen::VectorXd& OuNoise::next(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < x_.size(); ++i) {
    x_[i] += theta_ * (0.0 - x_[i]) + sigma_ * normal(rng);
  }
  return x_;
}

}  // namespace mecrl
