#include "doctest.h"

#include "bsmx/kernels.hpp"
#include "bsmx/prox.hpp"
#include "support.hpp"

using namespace bsmx;
using bsmx::test::Rng;

TEST_CASE("correlation norms match the dense product") {
  Rng rng(1);
  for (Index S : {1, 63, 64, 65, 300}) {
    for (Index O : {1, 3}) {
      const auto G = test::random_design(rng, 12, S, O);
      const Matrix R = rng.normal_matrix(12, 7);
      const Vector expected = test::dense_correlation_norms(G.entries(), O, R);
      const Vector serial = kernels::serial::block_correlation_norms(G, R);
      CHECK((serial - expected).cwiseAbs().maxCoeff() <= 1e-12 * expected.maxCoeff());
      // Chunked GEMMs round differently from per-block products.
      const Vector parallel = kernels::parallel::block_correlation_norms(G, R);
      CHECK((parallel - serial).cwiseAbs().maxCoeff() <= 1e-12 * serial.maxCoeff());
      CHECK(kernels::block_correlation_norms(G, R) == parallel);
    }
  }
  const auto G = test::random_design(rng, 4, 3, 1);
  CHECK_THROWS_AS(kernels::serial::block_correlation_norms(G, Matrix::Zero(5, 2)), DimensionError);
  CHECK_THROWS_AS(kernels::parallel::block_correlation_norms(G, Matrix::Zero(5, 2)),
                  DimensionError);
}

TEST_CASE("parallel kernels are bitwise independent of the thread count") {
  Rng rng(2);
  const auto G = test::random_design(rng, 30, 1000, 3);
  const Matrix R = rng.normal_matrix(30, 20);
  const int saved = kernels::max_threads();
  kernels::set_num_threads(1);
  const Vector one = kernels::parallel::block_correlation_norms(G, R);
  const Vector lip_one = kernels::parallel::block_lipschitz_all(G);
  for (int threads : {2, 3, 4}) {
    kernels::set_num_threads(threads);
    CHECK(kernels::parallel::block_correlation_norms(G, R) == one);
    CHECK(kernels::parallel::block_lipschitz_all(G) == lip_one);
  }
  kernels::set_num_threads(saved);
}

TEST_CASE("block Lipschitz scan") {
  Rng rng(3);
  Matrix g = rng.normal_matrix(9, 3 * 130);
  g.middleCols(3 * 70, 3).setZero();
  const BlockDesign G(g, 3);
  const Vector serial = kernels::serial::block_lipschitz_all(G);
  const Vector parallel = kernels::parallel::block_lipschitz_all(G);
  CHECK(serial == parallel);
  CHECK(serial[70] == 0.0);
  for (Index s = 0; s < G.n_locations(); ++s) {
    if (s == 70) continue;
    CHECK(serial[s] == doctest::Approx(block_lipschitz(G.block(s))).epsilon(1e-14));
  }
}

TEST_CASE("thread controls") {
  CHECK(kernels::max_threads() >= 1);
#ifdef _OPENMP
  CHECK(kernels::built_with_openmp());
#endif
}
