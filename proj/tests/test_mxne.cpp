#include "doctest.h"

#include <numeric>
#include <sstream>

#include "bsmx/mxne.hpp"
#include "bsmx/oracle.hpp"
#include "support.hpp"

using namespace bsmx;
using bsmx::test::Rng;

namespace {

double dense_primal(const Matrix& M, const Matrix& G, Index O, const Matrix& X, double lambda) {
  double pen = 0.0;
  for (Index s = 0; s < X.rows() / O; ++s) pen += X.middleRows(s * O, O).norm();
  return 0.5 * (M - G * X).squaredNorm() + lambda * pen;
}

BlockSparseEstimate zero_like(const BlockDesign& G, const Measurements& M) {
  return BlockSparseEstimate(G.n_locations(), G.n_orient(), M.n_times());
}

}  // namespace

TEST_CASE("primal objective") {
  Rng rng(1);
  const auto [G, M] = test::random_instance(rng, 8, 10, 3, 4);
  SUBCASE("zero estimate") {
    CHECK(primal_objective(M, G, zero_like(G, M), 0.7) ==
          doctest::Approx(0.5 * M.entries().squaredNorm()));
  }
  SUBCASE("zero data, one block") {
    const Matrix B = rng.normal_matrix(3, 4);
    const auto est = BlockSparseEstimate::from_blocks(10, 3, 4, {6}, {B});
    const Measurements zero(Matrix::Zero(8, 4));
    CHECK(primal_objective(zero, G, est, 0.7) ==
          doctest::Approx(0.5 * (G.block(6) * B).squaredNorm() + 0.7 * B.norm()).epsilon(1e-14));
  }
  SUBCASE("dense recomputation") {
    for (int i = 0; i < 10; ++i) {
      const auto est = test::random_estimate(rng, 10, 3, 4, 4);
      const double expected = dense_primal(M.entries(), G.entries(), 3, densify(est), 1.3);
      CHECK(std::abs(primal_objective(M, G, est, 1.3) - expected) <= 1e-12 * expected);
    }
  }
  CHECK_THROWS_AS(primal_objective(M, G, zero_like(G, M), 0.0), InvalidArgument);
}

TEST_CASE("dual map and dual objective") {
  Rng rng(2);
  const auto G = test::random_design(rng, 7, 12, 3);
  const double lambda = 0.8;
  SUBCASE("zero stays zero") {
    CHECK(dual_map(Matrix::Zero(7, 5), G, lambda).isZero(0.0));
    CHECK(dual_objective(Measurements(rng.normal_matrix(7, 5)), Matrix::Zero(7, 5)) == 0.0);
  }
  SUBCASE("scaled by the violation ratio") {
    Matrix Y = rng.normal_matrix(7, 5);
    const double worst = test::dense_correlation_norms(G.entries(), 3, Y).maxCoeff();
    Y *= 2.0 * lambda / worst;
    const Matrix mapped = dual_map(Y, G, lambda);
    CHECK((mapped - Y / 2.0).norm() <= 1e-14 * Y.norm());
  }
  SUBCASE("feasible input is unchanged") {
    Matrix Y = rng.normal_matrix(7, 5);
    Y *= 0.5 * lambda / test::dense_correlation_norms(G.entries(), 3, Y).maxCoeff();
    CHECK(dual_map(Y, G, lambda) == Y);
  }
  SUBCASE("always feasible") {
    for (int i = 0; i < 50; ++i) {
      const Matrix Y = rng.normal_matrix(7, 5) * rng.uniform(0.01, 100.0);
      const Matrix mapped = dual_map(Y, G, lambda);
      CHECK(test::dense_correlation_norms(G.entries(), 3, mapped).maxCoeff() <=
            lambda * (1.0 + 1e-12));
    }
  }
  SUBCASE("Y = M gives half the squared norm") {
    const Measurements M(rng.normal_matrix(7, 5));
    CHECK(dual_objective(M, M.entries()) == doctest::Approx(0.5 * M.entries().squaredNorm()));
  }
}

TEST_CASE("lambda_max") {
  Rng rng(3);
  SUBCASE("zero data") {
    const auto G = test::random_design(rng, 6, 5, 3);
    CHECK(lambda_max(Measurements(Matrix::Zero(6, 3)), G) == 0.0);
  }
  SUBCASE("single nonzero block") {
    Matrix g = Matrix::Zero(6, 9);
    g.middleCols(3, 3) = rng.normal_matrix(6, 3);
    const BlockDesign G(g, 3);
    const Measurements M(rng.normal_matrix(6, 4));
    CHECK(lambda_max(M, G) ==
          doctest::Approx((g.middleCols(3, 3).transpose() * M.entries()).norm()).epsilon(1e-14));
  }
  SUBCASE("bracket") {
    for (int i = 0; i < 10; ++i) {
      const auto [G, M] = test::random_instance(rng, 10, 25, i % 2 == 0 ? 1 : 3, 5);
      const double lmax = lambda_max(M, G);
      SolverConfig cfg;
      CHECK(solve_active_set(M, G, std::nullopt, 1.01 * lmax, cfg).estimate.empty());
      CHECK_FALSE(solve_active_set(M, G, std::nullopt, 0.99 * lmax, cfg).estimate.empty());
      const BlockStepSizes mu = BlockStepSizes::compute(G);
      CHECK(solve_bcd(M, G, zero_like(G, M), mu, 1.01 * lmax, 1e-6).estimate.empty());
    }
  }
}

TEST_CASE("duality gap") {
  Rng rng(4);
  SUBCASE("one block with orthogonal columns has a closed form") {
    const double c = 1.7;
    const BlockDesign Q = test::orthonormal_design(rng, 9, 1, 3);
    const BlockDesign G(c * Q.entries(), 3);
    const Measurements M(rng.normal_matrix(9, 4));
    const double lambda = 0.3 * lambda_max(M, G);
    const Matrix ls = G.entries().transpose() * M.entries() / (c * c);
    const Matrix x = group_soft_threshold(ls, lambda / (c * c));
    const auto est = BlockSparseEstimate::from_blocks(1, 3, 4, {0}, {x});
    CHECK(duality_gap(M, G, est, lambda).gap < 1e-10);
  }
  SUBCASE("zero is optimal above lambda_max") {
    const auto [G, M] = test::random_instance(rng, 8, 10, 3, 4);
    const GapReport r = duality_gap(M, G, zero_like(G, M), lambda_max(M, G));
    CHECK(std::abs(r.gap) <= 1e-12 * r.primal);
  }
  SUBCASE("perturbing the optimum opens the gap") {
    const auto [G, M] = test::random_instance(rng, 8, 10, 3, 4);
    const double lambda = 0.4 * lambda_max(M, G);
    SolverConfig cfg;
    cfg.gap_tol = 1e-12;
    const auto opt = solve_active_set(M, G, std::nullopt, lambda, cfg).estimate;
    std::vector<Matrix> blocks = opt.blocks();
    blocks[0] *= 1.1;
    const auto off = BlockSparseEstimate::from_blocks(10, 3, 4, opt.active_set(), blocks);
    CHECK(duality_gap(M, G, off, lambda).gap > 1e-6);
    const GapReport r = duality_gap(M, G, off, lambda);
    CHECK(r.gap == doctest::Approx(r.primal - r.dual));
    CHECK(test::dense_correlation_norms(G.entries(), 3, r.feasible_dual).maxCoeff() <=
          lambda * (1.0 + 1e-12));
  }
}

TEST_CASE("BCD on an orthogonal design is exact after one sweep") {
  Rng rng(5);
  const BlockDesign G = test::orthonormal_design(rng, 40, 10, 3);
  const Measurements M(rng.normal_matrix(40, 6));
  const double lambda = 0.5 * lambda_max(M, G);
  const BlockStepSizes mu = BlockStepSizes::compute(G);
  const SolveResult r = solve_bcd(M, G, zero_like(G, M), mu, lambda, 1e-12);
  CHECK(r.iterations == 1);
  CHECK(r.gap < 1e-12);
  const Matrix C = G.entries().transpose() * M.entries();
  for (Index s = 0; s < 10; ++s) {
    const Matrix expected = group_soft_threshold(C.middleRows(s * 3, 3), lambda);
    const Matrix* got = r.estimate.find(s);
    if (expected.isZero(0.0)) {
      CHECK(got == nullptr);
    } else {
      REQUIRE(got != nullptr);
      CHECK((*got - expected).norm() <= 1e-12 * expected.norm());
    }
  }
}

TEST_CASE("BCD iterations") {
  Rng rng(6);
  const auto [G, M] = test::random_instance(rng, 20, 30, 3, 10, 4);
  const double lambda = 0.2 * lambda_max(M, G);
  const BlockStepSizes mu = BlockStepSizes::compute(G);

  oracle::ProxGradOptions tight;
  tight.gap_tol = 1e-12;
  const double optimum = oracle::solve_proximal_gradient(M, G, lambda, tight).trace.back().primal;

  const SolveResult r = solve_bcd(M, G, zero_like(G, M), mu, lambda, 1e-8);
  const auto& trace = r.trace.entries();
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    // Monotone descent.
    CHECK(trace[i].primal <= trace[i - 1].primal * (1.0 + 1e-12));
  }
  for (const auto& e : trace) {
    // The gap is valid and bounds the suboptimality.
    CHECK(e.gap >= -1e-10);
    CHECK(e.primal - optimum <= e.gap + 1e-9);
  }
  CHECK(std::abs(primal_objective(M, G, r.estimate, lambda) - optimum) < 1e-6);
  CHECK(r.gap < 1e-8);

  SUBCASE("deterministic") {
    const SolveResult again = solve_bcd(M, G, zero_like(G, M), mu, lambda, 1e-8);
    CHECK(densify(again.estimate) == densify(r.estimate));
  }
  SUBCASE("sweep cap raises with the last iterate") {
    try {
      solve_bcd(M, G, zero_like(G, M), mu, lambda, 1e-14, 2);
      FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
      CHECK(e.gap() > 1e-14);
      CHECK_FALSE(e.last_iterate().empty());
    }
  }
  SUBCASE("candidate checks") {
    const std::vector<Index> unordered{3, 1};
    CHECK_THROWS_AS(solve_bcd(M, G, unordered, zero_like(G, M), mu, lambda, 1e-6),
                    InvalidArgument);
    const std::vector<Index> some{1, 3};
    const auto outside = BlockSparseEstimate::from_blocks(30, 3, 10, {2}, {Matrix::Ones(3, 10)});
    CHECK_THROWS_AS(solve_bcd(M, G, some, outside, mu, lambda, 1e-6), InvalidArgument);
  }
}

TEST_CASE("violator selection") {
  Vector scores(8);
  scores << 5, 1, 7, 7, 0.5, 9, 3, 7;
  const std::vector<Index> none;
  SUBCASE("top scores, ties to the lower index, sorted output") {
    CHECK(select_violators(scores, none, none, 2.0, 3) == std::vector<Index>{2, 3, 5});
    CHECK(select_violators(scores, none, none, 2.0, 4) == std::vector<Index>{2, 3, 5, 7});
  }
  SUBCASE("only strict violators, never active or excluded ones") {
    const std::vector<Index> active{5};
    const std::vector<Index> excluded{2};
    CHECK(select_violators(scores, active, excluded, 5.0, 10) == std::vector<Index>{3, 7});
    CHECK(select_violators(scores, none, none, 9.0, 10).empty());
  }
}

TEST_CASE("active-set solver") {
  Rng rng(7);
  SUBCASE("first candidates at zero are the top batch of correlations") {
    const auto [G, M] = test::random_instance(rng, 15, 40, 1, 5);
    const double lambda = 0.05 * lambda_max(M, G);
    const Vector scores = test::dense_correlation_norms(G.entries(), 1, M.entries());
    const std::vector<Index> none;
    const auto first = select_violators(scores, none, none, lambda, 4);
    std::vector<Index> ranked(40);
    std::iota(ranked.begin(), ranked.end(), 0);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](Index a, Index b) { return scores[a] > scores[b]; });
    ranked.resize(4);
    std::sort(ranked.begin(), ranked.end());
    CHECK(first == ranked);
  }
  SUBCASE("matches full-space BCD") {
    for (int i = 0; i < 10; ++i) {
      const auto [G, M] = test::random_instance(rng, 20, 50, i % 2 == 0 ? 1 : 3, 8);
      const double lambda = rng.uniform(0.1, 0.9) * lambda_max(M, G);
      SolverConfig cfg;
      const SolveResult as = solve_active_set(M, G, std::nullopt, lambda, cfg);
      const SolveResult full =
          solve_bcd(M, G, zero_like(G, M), BlockStepSizes::compute(G), lambda, 1e-6);
      CHECK(std::abs(primal_objective(M, G, as.estimate, lambda) -
                     primal_objective(M, G, full.estimate, lambda)) < 1e-6);
      CHECK(duality_gap(M, G, as.estimate, lambda).gap < 1e-6);
      CHECK(as.gap < 1e-6);
    }
  }
  SUBCASE("above lambda_max no BCD runs") {
    const auto [G, M] = test::random_instance(rng, 10, 20, 3, 5);
    const SolveResult r = solve_active_set(M, G, std::nullopt, lambda_max(M, G), SolverConfig{});
    CHECK(r.estimate.empty());
    CHECK(r.iterations == 0);
  }
  SUBCASE("KKT conditions at convergence") {
    for (int i = 0; i < 5; ++i) {
      const auto [G, M] = test::random_instance(rng, 20, 50, 3, 10);
      const double lambda = 0.3 * lambda_max(M, G);
      SolverConfig cfg;
      cfg.gap_tol = 1e-12;
      const auto est = solve_active_set(M, G, std::nullopt, lambda, cfg).estimate;
      const auto kkt = test::kkt_report(M.entries(), G, est, lambda);
      CHECK(kkt.inactive_ratio <= 1.0 + 1e-8);
      CHECK(kkt.stationarity <= 1e-6);
    }
  }
  SUBCASE("warm start from the solution finishes at once") {
    const auto [G, M] = test::random_instance(rng, 20, 50, 3, 10);
    const double lambda = 0.3 * lambda_max(M, G);
    SolverConfig cfg;
    const SolveResult cold = solve_active_set(M, G, std::nullopt, lambda, cfg);
    const SolveResult warm = solve_active_set(M, G, cold.estimate, lambda, cfg);
    CHECK(warm.iterations == 0);
    CHECK(densify(warm.estimate) == densify(cold.estimate));
  }
  SUBCASE("zero gain blocks never enter") {
    Matrix g = rng.normal_matrix(12, 20);
    g.col(4).setZero();
    g.col(11).setZero();
    const BlockDesign G(g, 1);
    const Measurements M(rng.normal_matrix(12, 5));
    const SolveResult r = solve_active_set(M, G, std::nullopt, 0.05 * lambda_max(M, G), {});
    CHECK(r.estimate.find(4) == nullptr);
    CHECK(r.estimate.find(11) == nullptr);
    CHECK(r.gap < 1e-6);
  }
  SUBCASE("argument checks") {
    const auto [G, M] = test::random_instance(rng, 10, 20, 3, 5);
    SolverConfig bad;
    bad.active_batch = 0;
    CHECK_THROWS_AS(solve_active_set(M, G, std::nullopt, 1.0, bad), InvalidArgument);
    CHECK_THROWS_AS(solve_active_set(M, G, std::nullopt, -1.0, {}), InvalidArgument);
  }
}

TEST_CASE("convergence trace CSV") {
  ConvergenceTrace outer;
  outer.record(1.0, 0, 3.0);
  ConvergenceTrace trace;
  trace.record(0.5, 3, 2.25);
  trace.record(1e-7, 2, 2.0);
  std::ostringstream os;
  trace.write_csv(os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "iter,gap,active_size,primal,seconds");
  std::string row;
  std::getline(is, row);
  CHECK(row.rfind("0,0.5,3,2.25,", 0) == 0);
  std::getline(is, row);
  CHECK(row.rfind("1,1e-07,2,2,", 0) == 0);

  // Appended entries move onto the outer clock, which started earlier.
  outer.append(trace);
  REQUIRE(outer.entries().size() == 3);
  CHECK(outer.entries()[2].iter == 2);
  CHECK(outer.entries()[1].seconds >= trace.entries()[0].seconds);
  CHECK(outer.entries()[2].seconds >= outer.entries()[1].seconds);
}
