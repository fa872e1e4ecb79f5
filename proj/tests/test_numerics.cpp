// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <complex>
#include <numbers>

#include <doctest.h>

#include "mecrl/numerics.hpp"

using namespace mecrl;
using cd = std::complex<double>;

namespace {

ComplexMatd random_matrix(int rows, int cols, Rng& rng, double variance = 1.0) {
  ComplexMatd h(rows, cols);
  for (int j = 0; j < cols; ++j) h.col(j) = sample_complex_gaussian<double>(static_cast<std::size_t>(rows), variance, rng);
  return h;
}

ComplexMatd naive_gram(const ComplexMatd& h) {
  ComplexMatd g = ComplexMatd::Zero(h.cols(), h.cols());
  for (Eigen::Index i = 0; i < h.cols(); ++i)
    for (Eigen::Index j = 0; j < h.cols(); ++j)
      for (Eigen::Index k = 0; k < h.rows(); ++k) g(i, j) += std::conj(h(k, i)) * h(k, j);
  return g;
}

double series_j0(double x, int terms = 20) {
  double sum = 0.0;
  for (int k = 0; k < terms; ++k) {
    const double fact = std::tgamma(k + 1.0);
    sum += std::pow(-1.0, k) * std::pow(x / 2.0, 2 * k) / (fact * fact);
  }
  return sum;
}

}  // namespace

TEST_CASE("sample_complex_gaussian: zero variance gives the zero vector") {
  Rng rng(1);
  const auto z = sample_complex_gaussian<double>(3, 0.0, rng);
  CHECK(z.size() == 3);
  CHECK(z.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sample_complex_gaussian: negative variance is rejected") {
  Rng rng(1);
  CHECK_THROWS_AS(sample_complex_gaussian<double>(2, -1.0, rng), std::invalid_argument);
}

TEST_CASE("sample_complex_gaussian: second moments") {
  Rng rng(2);
  constexpr int draws = 250000;  // x4 entries = 1e6 samples
  double power = 0.0;
  for (int i = 0; i < draws; ++i) power += sample_complex_gaussian<double>(4, 1e-9, rng).squaredNorm();
  CHECK(power / (4.0 * draws) == doctest::Approx(1e-9).epsilon(0.02));

  double re2 = 0.0;
  constexpr int n = 1000000;
  for (int i = 0; i < n; ++i) re2 += std::norm(sample_complex_gaussian<double>(1, 4.0, rng)[0].real());
  CHECK(re2 / n == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("hermitian_gram") {
  CHECK(hermitian_gram(ComplexMatd::Identity(3, 3)).isApprox(ComplexMatd::Identity(3, 3)));
  CHECK(hermitian_gram(ComplexMatd(2.0 * ComplexMatd::Identity(2, 2))).isApprox(ComplexMatd(4.0 * ComplexMatd::Identity(2, 2))));

  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const ComplexMatd h = random_matrix(4, 3, rng);
    const ComplexMatd g = hermitian_gram(h);
    CHECK((g - naive_gram(h)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((g - g.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    // positive semidefinite
    for (int k = 0; k < 10; ++k) {
      const ComplexVecd x = sample_complex_gaussian<double>(3, 1.0, rng);
      CHECK((x.adjoint() * g * x)(0, 0).real() >= -1e-12);
    }
  }
  CHECK_THROWS_AS(hermitian_gram(ComplexMatd::Identity(2, 3)), std::invalid_argument);
}

TEST_CASE("cmat_inverse") {
  CHECK(cmat_inverse(ComplexMatd::Identity(3, 3)).isApprox(ComplexMatd::Identity(3, 3)));

  ComplexMatd d = ComplexMatd::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = cd(0.0, 4.0);
  const ComplexMatd inv = cmat_inverse(d);
  CHECK(std::abs(inv(0, 0) - cd(0.5, 0.0)) < 1e-15);
  CHECK(std::abs(inv(1, 1) - cd(0.0, -0.25)) < 1e-15);
  CHECK(std::abs(inv(0, 1)) == 0.0);

  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const ComplexMatd a = random_matrix(3, 3, rng) + 3.0 * ComplexMatd::Identity(3, 3);
    const ComplexMatd ai = cmat_inverse(a);
    CHECK((a * ai - ComplexMatd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((cmat_inverse(ai) - a).cwiseAbs().maxCoeff() < 1e-8);
  }

  ComplexMatd singular(2, 2);
  singular << 1.0, 2.0, 2.0, 4.0;
  CHECK_THROWS_AS(cmat_inverse(singular), SingularMatrixError);
  CHECK_THROWS_AS(cmat_inverse(ComplexMatd::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("cmat_inverse needs the row swap") {
  ComplexMatd a(2, 2);
  a << 0.0, 1.0, 1.0, 0.0;
  CHECK(cmat_inverse(a).isApprox(a));
}

TEST_CASE("zf_diag") {
  SUBCASE("single column") {
    ComplexMatd h = ComplexMatd::Zero(3, 1);
    h(0, 0) = cd(1.0, 2.0);  // |h|^2 = 5
    const auto d = zf_diag(h);
    CHECK(d[0] == doctest::Approx(0.2));
  }
  SUBCASE("orthogonal columns") {
    ComplexMatd h = ComplexMatd::Zero(4, 2);
    h(0, 0) = std::sqrt(2.0);
    h(1, 1) = cd(0.0, 2.0);
    const auto d = zf_diag(h);
    CHECK(d[0] == doctest::Approx(0.5));
    CHECK(d[1] == doctest::Approx(0.25));
  }
  SUBCASE("matches the pseudo-inverse row norms") {
    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
      const ComplexMatd h = random_matrix(4, 3, rng, 1e-9);
      const ComplexMatd pinv = h.completeOrthogonalDecomposition().pseudoInverse();
      const ComplexMatd ppH = pinv * pinv.adjoint();
      const auto d = zf_diag(h);
      for (int m = 0; m < 3; ++m) {
        CHECK(d[m] > 0.0);
        CHECK(std::abs(ppH(m, m).imag()) < 1e-12 * std::abs(ppH(m, m).real()) + 1e-300);
        CHECK(d[m] == doctest::Approx(ppH(m, m).real()).epsilon(1e-10));
      }
    }
  }
  SUBCASE("scaling one column scales only its entry") {
    Rng rng(6);
    ComplexMatd h = random_matrix(4, 3, rng);
    const auto before = zf_diag(h);
    h.col(1) *= 3.0;
    const auto after = zf_diag(h);
    CHECK(after[0] == doctest::Approx(before[0]).epsilon(1e-10));
    CHECK(after[1] == doctest::Approx(before[1] / 9.0).epsilon(1e-10));
    CHECK(after[2] == doctest::Approx(before[2]).epsilon(1e-10));
  }
  SUBCASE("colliding users are rank deficient") {
    Rng rng(7);
    ComplexMatd h = random_matrix(4, 2, rng, 1e-9);
    h.col(1) = h.col(0);
    CHECK_THROWS_AS(zf_diag(h), RankDeficiencyError);
  }
}

TEST_CASE("bessel_j0") {
  CHECK(bessel_j0(0.0) == 1.0);
  const double x = 2.0 * std::numbers::pi * 70.0 * 0.001;
  CHECK(std::abs(bessel_j0(x) - series_j0(x)) < 1e-12);
  CHECK(std::abs(bessel_j0(x) - 0.9522205) < 1e-6);
  CHECK(bessel_j0(-x) == bessel_j0(x));
  for (int i = 0; i < 100; ++i) {
    const double v = 5.0 * i / 99.0;
    CHECK(std::abs(bessel_j0(v) - series_j0(v, 30)) < 1e-8);
  }
  CHECK(std::abs(bessel_j0(20.0) - std::cyl_bessel_j(0.0, 20.0)) < 1e-8);
}
