// SPDX-License-Identifier: Apache-2.0
//
// Small dense complex algebra for the zero-forcing receiver, plus the few
// special functions and samplers the channel model needs.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "mecrl/errors.hpp"

namespace mecrl {

using Rng = std::mt19937_64;

template <typename Real>
using ComplexVec = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using ComplexMat = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

using ComplexVecd = ComplexVec<double>;
using ComplexMatd = ComplexMat<double>;

/// Draws n i.i.d. circularly-symmetric complex Gaussian entries with
/// E[|z|^2] = variance: z = sqrt(variance / 2) * (x + iy), x, y ~ N(0, 1).
template <typename Real = double>
ComplexVec<Real> sample_complex_gaussian(std::size_t n, Real variance, Rng& rng) {
  if (!(variance >= Real(0))) {
    throw std::invalid_argument("sample_complex_gaussian: variance must be >= 0");
  }
  std::normal_distribution<Real> normal(Real(0), Real(1));
  const Real scale = std::sqrt(variance / Real(2));
  ComplexVec<Real> out(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const Real re = normal(rng);
    const Real im = normal(rng);
    out[i] = std::complex<Real>(scale * re, scale * im);
  }
  return out;
}

/// H^H H for a tall N x M matrix. The lower triangle is mirrored from the
/// upper one so the result is exactly Hermitian with a real diagonal.
template <typename Derived>
auto hermitian_gram(const Eigen::MatrixBase<Derived>& h) {
  using Scalar = typename Derived::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  if (h.cols() < 1 || h.rows() < h.cols()) {
    throw std::invalid_argument("hermitian_gram: expected N >= M >= 1");
  }
  const Eigen::Index m = h.cols();
  ComplexMat<Real> gram(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    gram(i, i) = std::complex<Real>(h.col(i).squaredNorm(), Real(0));
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const std::complex<Real> v = h.col(i).dot(h.col(j));  // conj(h_i) . h_j
      gram(i, j) = v;
      gram(j, i) = std::conj(v);
    }
  }
  return gram;
}

/// Gauss-Jordan inversion with partial pivoting (largest modulus in the
/// column). Throws SingularMatrixError when a pivot falls below 1e-14.
template <typename Derived>
auto cmat_inverse(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  constexpr Real kPivotFloor = Real(1e-14);

  if (a.rows() != a.cols()) {
    throw std::invalid_argument("cmat_inverse: matrix must be square");
  }
  const Eigen::Index n = a.rows();
  Mat work = a;
  Mat inv = Mat::Identity(n, n);

  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = col;
    Real best = std::abs(work(col, col));
    for (Eigen::Index r = col + 1; r < n; ++r) {
      const Real mag = std::abs(work(r, col));
      if (mag > best) {
        best = mag;
        pivot = r;
      }
    }
    if (!(best >= kPivotFloor)) {
      throw SingularMatrixError("cmat_inverse: pivot modulus below 1e-14");
    }
    if (pivot != col) {
      work.row(col).swap(work.row(pivot));
      inv.row(col).swap(inv.row(pivot));
    }
    const Scalar scale = Scalar(1) / work(col, col);
    work.row(col) *= scale;
    inv.row(col) *= scale;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == col) continue;
      const Scalar factor = work(r, col);
      if (factor == Scalar(0)) continue;
      work.row(r) -= factor * work.row(col);
      inv.row(r) -= factor * inv.row(col);
    }
  }
  return inv;
}

/// Diagonal of (H^H H)^{-1}, i.e. the squared row norms of the ZF detector
/// H^dagger. Entries are real and positive for full-column-rank H.
template <typename Derived>
auto zf_diag(const Eigen::MatrixBase<Derived>& h) {
  using Scalar = typename Derived::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  const auto gram = hermitian_gram(h);
  ComplexMat<Real> inv;
  try {
    inv = cmat_inverse(gram);
  } catch (const SingularMatrixError&) {
    throw RankDeficiencyError("zf_diag: channel matrix is rank deficient");
  }
  Eigen::Matrix<Real, Eigen::Dynamic, 1> diag(inv.rows());
  for (Eigen::Index m = 0; m < inv.rows(); ++m) {
    diag[m] = inv(m, m).real();
    if (!(diag[m] > Real(0))) {
      throw RankDeficiencyError("zf_diag: non-positive diagonal, channel matrix is ill conditioned");
    }
  }
  return diag;
}

/// Bessel function of the first kind, order zero, from its power series
/// sum_k (-1)^k (x/2)^{2k} / (k!)^2. Accurate to ~1e-9 for |x| <= 20.
template <typename Real>
Real bessel_j0(Real x) {
  const Real q = (x / Real(2)) * (x / Real(2));
  Real term = Real(1);
  Real sum = Real(1);
  for (int k = 1; k <= 80; ++k) {
    term *= -q / (Real(k) * Real(k));
    sum += term;
    if (std::abs(term) < std::numeric_limits<Real>::epsilon() * Real(1e-2)) break;
  }
  return sum;
}

/// Jakes-model lag-one correlation J0(2 pi f_d tau).
template <typename Real>
Real doppler_correlation(Real doppler_hz, Real slot_s) {
  return bessel_j0(Real(2) * std::numbers::pi_v<Real> * doppler_hz * slot_s);
}

}  // namespace mecrl
