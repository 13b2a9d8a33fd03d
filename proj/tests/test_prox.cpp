#include "doctest.h"

#include <cmath>
#include <numbers>

#include "bsmx/prox.hpp"
#include "support.hpp"

using namespace bsmx;
using bsmx::test::Rng;

namespace {

// Largest eigenvalue of a symmetric 3x3 matrix from the roots of its
// characteristic polynomial (trigonometric form).
double largest_eigenvalue_3x3(const Eigen::Matrix3d& A) {
  const double p1 = A(0, 1) * A(0, 1) + A(0, 2) * A(0, 2) + A(1, 2) * A(1, 2);
  const double q = A.trace() / 3.0;
  if (p1 == 0.0) return A.diagonal().maxCoeff();
  const double p2 = std::pow(A(0, 0) - q, 2) + std::pow(A(1, 1) - q, 2) + std::pow(A(2, 2) - q, 2) +
                    2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  const Eigen::Matrix3d B = (A - q * Eigen::Matrix3d::Identity()) / p;
  const double r = std::clamp(B.determinant() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  return q + 2.0 * p * std::cos(phi);
}

// argmin over a in [0, 1] of 1/2 ||a x - x||^2 + thr * a ||x|| by golden-section search.
double golden_section_scale(double norm, double thr) {
  auto f = [&](double a) { return 0.5 * std::pow((a - 1.0) * norm, 2) + thr * a * norm; };
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double a = hi - g * (hi - lo);
    const double b = lo + g * (hi - lo);
    if (f(a) < f(b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("group soft threshold examples") {
  SUBCASE("inside the ball gives an exact zero") {
    Matrix x(1, 2);
    x << 0.3, 0.4;  // norm 0.5
    const Matrix out = group_soft_threshold(x, 1.0);
    CHECK((out.array() == 0.0).all());
  }
  SUBCASE("vanishing threshold is the identity") {
    Rng rng(1);
    const Matrix x = rng.normal_matrix(3, 5);
    const Matrix out = group_soft_threshold(x, 1e-15);
    CHECK((out - x).norm() / x.norm() < 1e-12);
  }
  SUBCASE("agrees with a golden-section minimization") {
    Rng rng(2);
    for (int i = 0; i < 20; ++i) {
      const Matrix x = rng.normal_matrix(3, 5);
      const double thr = 0.7 * x.norm();
      const Matrix out = group_soft_threshold(x, thr);
      CHECK(out.norm() == doctest::Approx(0.3 * x.norm()).epsilon(1e-12));
      // Golden section pins the minimizer only to about sqrt(machine eps).
      const double a = golden_section_scale(x.norm(), thr);
      CHECK((out - a * x).norm() < 1e-6 * x.norm());
    }
  }
  SUBCASE("on the boundary the block is zero") {
    Matrix x(1, 1);
    x << 2.0;
    CHECK(group_soft_threshold(x, 2.0).isZero(0.0));
  }
  SUBCASE("threshold must be positive") {
    const Matrix x = Matrix::Ones(2, 2);
    CHECK_THROWS_AS(group_soft_threshold(x, 0.0), InvalidArgument);
    CHECK_THROWS_AS(group_soft_threshold(x, -1.0), InvalidArgument);
  }
}

TEST_CASE("group soft threshold properties") {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const Index O = rng.integer(1, 3);
    const Index T = rng.integer(1, 8);
    const Matrix a = rng.normal_matrix(O, T);
    const Matrix b = rng.normal_matrix(O, T);
    const double thr = rng.uniform(0.01, 3.0);
    const Matrix pa = group_soft_threshold(a, thr);
    const Matrix pb = group_soft_threshold(b, thr);
    // Non-expansive.
    CHECK((pa - pb).norm() <= (a - b).norm() * (1.0 + 1e-14));
    // Nonnegative scaling of the input.
    if (a.norm() <= thr) {
      CHECK((pa.array() == 0.0).all());
    } else {
      const double scale = pa.norm() / a.norm();
      CHECK(scale > 0.0);
      CHECK((pa - scale * a).norm() <= 1e-13 * a.norm());
    }
  }
}

TEST_CASE("block Lipschitz constants") {
  SUBCASE("orthonormal block") {
    Matrix b = Matrix::Zero(5, 3);
    b(0, 0) = b(2, 1) = b(4, 2) = 1.0;
    CHECK(block_lipschitz(b) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("single column") {
    Vector g(4);
    g << 1, 2, 3, 4;
    CHECK(block_lipschitz(2.5 * g) == doctest::Approx(6.25 * 30.0).epsilon(1e-14));
  }
  SUBCASE("random 8x3 blocks against the characteristic polynomial") {
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
      const Matrix b = rng.normal_matrix(8, 3);
      const Eigen::Matrix3d gram = b.transpose() * b;
      const double expected = largest_eigenvalue_3x3(gram);
      CHECK(std::abs(block_lipschitz(b) - expected) <= 1e-9 * expected);
    }
  }
  SUBCASE("zero block") {
    CHECK_THROWS_WITH_AS(block_lipschitz(Matrix::Zero(4, 3)), "degenerate design block",
                         DegenerateBlockError);
    CHECK(gram_spectral_norm(Matrix::Zero(4, 3)) == 0.0);
  }
}

TEST_CASE("step sizes flag degenerate blocks") {
  Rng rng(5);
  Matrix g = rng.normal_matrix(6, 12);
  g.middleCols(3, 3).setZero();
  const BlockDesign G(g, 3);
  const BlockStepSizes mu = BlockStepSizes::compute(G);
  CHECK(mu.degenerate == std::vector<Index>{1});
  CHECK_FALSE(mu.usable(1));
  for (Index s : {0, 2, 3}) {
    CHECK(mu.usable(s));
    CHECK(mu.mu[s] == doctest::Approx(1.0 / block_lipschitz(G.block(s))));
  }
}
