#include "doctest.h"

#include "bsmx/core.hpp"
#include "support.hpp"

using namespace bsmx;
using bsmx::test::Rng;

TEST_CASE("block design layout") {
  Matrix g(2, 6);
  g << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
  const BlockDesign G(g, 3);
  CHECK(G.n_sensors() == 2);
  CHECK(G.n_locations() == 2);
  CHECK(G.n_orient() == 3);
  CHECK(G.block(1)(0, 0) == 4.0);
  CHECK(G.block(1)(1, 2) == 12.0);

  CHECK_THROWS_AS(BlockDesign(Matrix::Ones(2, 5), 3), DimensionError);
  CHECK_THROWS_AS(BlockDesign(Matrix::Ones(2, 3), 0), InvalidArgument);
  Matrix bad = Matrix::Ones(2, 3);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(BlockDesign(bad, 1), InvalidArgument);
  bad(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Measurements{bad}, InvalidArgument);
}

TEST_CASE("restrict_to and scaled") {
  Rng rng(1);
  const BlockDesign G = test::random_design(rng, 4, 5, 2);
  const std::vector<Index> locs{4, 1};
  const BlockDesign R = G.restrict_to(locs);
  CHECK(R.n_locations() == 2);
  CHECK(R.block(0) == G.block(4));
  CHECK(R.block(1) == G.block(1));
  CHECK_THROWS_AS(G.restrict_to(std::vector<Index>{5}), InvalidArgument);

  const std::vector<double> f{1, 2, 0, 1, -1};
  const BlockDesign F = G.scaled(f);
  CHECK(F.block(1) == 2.0 * G.block(1));
  CHECK(F.block(2).isZero(0.0));
  CHECK(F.block(4) == -G.block(4));
  CHECK_THROWS_AS(G.scaled(std::vector<double>{1, 2}), DimensionError);
}

TEST_CASE("estimate construction keeps only nonzero blocks") {
  std::vector<Matrix> blocks{Matrix::Ones(2, 3), Matrix::Zero(2, 3), 2.0 * Matrix::Ones(2, 3)};
  const auto est = BlockSparseEstimate::from_blocks(10, 2, 3, {1, 4, 7}, blocks);
  CHECK(est.active_set() == std::vector<Index>{1, 7});
  CHECK(est.size() == 2);
  CHECK(est.find(4) == nullptr);
  REQUIRE(est.find(7) != nullptr);
  CHECK((*est.find(7))(0, 0) == 2.0);
  CHECK(est.l21_norm() == doctest::Approx(std::sqrt(6.0) + 2.0 * std::sqrt(6.0)));

  CHECK_THROWS_AS(BlockSparseEstimate::from_blocks(10, 2, 3, {4, 1}, {blocks[0], blocks[2]}),
                  InvalidArgument);
  CHECK_THROWS_AS(BlockSparseEstimate::from_blocks(10, 2, 3, {1, 1}, {blocks[0], blocks[2]}),
                  InvalidArgument);
  CHECK_THROWS_AS(BlockSparseEstimate::from_blocks(10, 2, 3, {10}, {blocks[0]}), InvalidArgument);
  CHECK_THROWS_AS(BlockSparseEstimate::from_blocks(10, 2, 3, {1}, {Matrix::Ones(3, 3)}),
                  DimensionError);
  CHECK_THROWS_AS(BlockSparseEstimate::from_blocks(10, 2, 3, {1, 2}, {blocks[0]}),
                  InvalidArgument);
}

TEST_CASE("densify") {
  SUBCASE("empty estimate is all zero") {
    const BlockSparseEstimate est(4, 3, 5);
    const Matrix X = densify(est);
    CHECK(X.rows() == 12);
    CHECK(X.cols() == 5);
    CHECK(X.isZero(0.0));
  }
  SUBCASE("single block lands in its rows") {
    Matrix b = Matrix::Identity(3, 5);
    const auto est = BlockSparseEstimate::from_blocks(4, 3, 5, {0}, {b});
    const Matrix X = densify(est);
    CHECK(X.topRows(3) == b);
    CHECK(X.bottomRows(9).isZero(0.0));
  }
  SUBCASE("round trip through sparsify is exact") {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
      const Index O = trial % 2 == 0 ? 1 : 3;
      Matrix X = rng.normal_matrix(12 * O, 7);
      for (Index s = 0; s < 12; ++s) {
        if (rng.uniform(0, 1) < 0.6) X.middleRows(s * O, O).setZero();
      }
      const BlockSparseEstimate est = sparsify(X, O);
      CHECK(densify(est) == X);
      for (std::size_t i = 0; i < est.size(); ++i) {
        CHECK_FALSE(est.blocks()[i].isZero(0.0));
      }
      const BlockSparseEstimate again = sparsify(densify(est), O);
      CHECK(again.active_set() == est.active_set());
    }
  }
  CHECK_THROWS_AS(sparsify(Matrix::Ones(5, 2), 3), DimensionError);
}

TEST_CASE("residual against the dense product") {
  Rng rng(3);
  SUBCASE("empty estimate gives M") {
    const auto G = test::random_design(rng, 6, 8, 3);
    const Measurements M(rng.normal_matrix(6, 4));
    CHECK(residual(M, G, BlockSparseEstimate(8, 3, 4)) == M.entries());
  }
  SUBCASE("perfect fit gives zero") {
    const auto G = test::random_design(rng, 6, 8, 3);
    const auto est = test::random_estimate(rng, 8, 3, 4, 3);
    const Measurements M(predict(G, est));
    CHECK(residual(M, G, est).norm() <= 1e-12 * M.entries().norm());
  }
  SUBCASE("random instances") {
    for (int trial = 0; trial < 25; ++trial) {
      const Index N = rng.integer(1, 30);
      const Index S = rng.integer(1, 50);
      const Index T = rng.integer(1, 20);
      const auto G = test::random_design(rng, N, S, 3);
      const auto est = test::random_estimate(rng, S, 3, T, rng.integer(0, S));
      const Measurements M(rng.normal_matrix(N, T));
      const Matrix dense = M.entries() - G.entries() * densify(est);
      const Matrix R = residual(M, G, est);
      CHECK((R - dense).norm() <= 1e-12 * std::max(1.0, dense.norm()));
    }
  }
}

TEST_CASE("dimension checks") {
  Rng rng(4);
  const auto G = test::random_design(rng, 5, 6, 3);
  CHECK_NOTHROW(check_dimensions(Measurements(Matrix::Zero(5, 2)), G));
  CHECK_THROWS_AS(check_dimensions(Measurements(Matrix::Zero(4, 2)), G), DimensionError);
  CHECK_THROWS_AS(residual(Measurements(Matrix::Zero(5, 2)), G, BlockSparseEstimate(6, 3, 3)),
                  DimensionError);
  CHECK_THROWS_AS(residual(Measurements(Matrix::Zero(5, 2)), G, BlockSparseEstimate(7, 3, 2)),
                  DimensionError);
  CHECK_THROWS_AS(residual(Measurements(Matrix::Zero(5, 2)), G, BlockSparseEstimate(6, 1, 2)),
                  DimensionError);
}

TEST_CASE("single time point is a valid problem") {
  Rng rng(5);
  const auto G = test::random_design(rng, 5, 6, 1);
  const auto est = test::random_estimate(rng, 6, 1, 1, 2);
  const Measurements M(rng.normal_matrix(5, 1));
  CHECK(residual(M, G, est).cols() == 1);
}

TEST_CASE("solver config") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.gap_tol == 1e-6);
  CHECK(c.reweight_tol == 1e-6);
  CHECK(c.max_reweight == 30);
  CHECK(c.active_batch == 10);
  CHECK(c.resolve_lambda(8.0) == doctest::Approx(4.0));
  c.lambda_is_relative = false;
  c.lambda = 3.0;
  CHECK(c.resolve_lambda(8.0) == 3.0);

  auto broken = [](auto mutate) {
    SolverConfig b;
    mutate(b);
    return b;
  };
  CHECK_THROWS_AS(broken([](SolverConfig& b) { b.lambda = 0; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(broken([](SolverConfig& b) { b.gap_tol = 0; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(broken([](SolverConfig& b) { b.reweight_tol = -1; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(broken([](SolverConfig& b) { b.active_batch = 0; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(broken([](SolverConfig& b) { b.max_reweight = 0; }).validate(), InvalidArgument);
}
