#include "bsmx/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <ostream>
#include <random>

#include "bsmx/io.hpp"
#include "bsmx/oracle.hpp"

namespace bsmx::bench {

Problem make_problem(const ProblemSpec& spec) {
  if (spec.n_sensors < 1 || spec.n_locations < 1 || spec.n_orient < 1 || spec.n_times < 1) {
    throw InvalidArgument("problem dimensions must be positive");
  }
  if (spec.n_active < 0 || spec.n_active > spec.n_locations) {
    throw InvalidArgument("n_active must be in [0, n_locations]");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal;
  auto fill = [&](Matrix& m) {
    for (Index j = 0; j < m.cols(); ++j) {
      for (Index i = 0; i < m.rows(); ++i) m(i, j) = normal(rng);
    }
  };

  Matrix g(spec.n_sensors, spec.n_locations * spec.n_orient);
  fill(g);
  g.colwise().normalize();
  BlockDesign G(std::move(g), spec.n_orient);

  std::vector<Index> locs(static_cast<std::size_t>(spec.n_locations));
  std::iota(locs.begin(), locs.end(), Index{0});
  std::shuffle(locs.begin(), locs.end(), rng);
  locs.resize(static_cast<std::size_t>(spec.n_active));
  std::sort(locs.begin(), locs.end());
  std::vector<Matrix> blocks;
  for (std::size_t i = 0; i < locs.size(); ++i) {
    Matrix b(spec.n_orient, spec.n_times);
    fill(b);
    blocks.push_back(std::move(b));
  }
  const auto truth = BlockSparseEstimate::from_blocks(spec.n_locations, spec.n_orient,
                                                      spec.n_times, locs, std::move(blocks));
  Matrix noise(spec.n_sensors, spec.n_times);
  fill(noise);
  Matrix m = predict(G, truth) + spec.noise * noise;
  return {std::move(G), Measurements(std::move(m))};
}

Solver parse_solver(const std::string& name) {
  if (name == "bcd") return Solver::bcd;
  if (name == "bcd_as") return Solver::bcd_as;
  if (name == "fista") return Solver::fista;
  if (name == "fista_as") return Solver::fista_as;
  throw InvalidArgument("unknown benchmark method '" + name +
                        "' (expected bcd, bcd_as, fista or fista_as)");
}

std::string to_string(Solver solver) {
  switch (solver) {
    case Solver::bcd: return "bcd";
    case Solver::bcd_as: return "bcd_as";
    case Solver::fista: return "fista";
    case Solver::fista_as: return "fista_as";
  }
  return "?";
}

BenchmarkRow run_one(const Problem& problem, Solver solver, double lambda_pct,
                     const SolverConfig& config) {
  const auto& [G, M] = problem;
  const double lambda = lambda_pct / 100.0 * lambda_max(M, G);
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");

  const auto start = std::chrono::steady_clock::now();
  auto solve = [&]() -> SolveResult {
    switch (solver) {
      case Solver::bcd: {
        const BlockSparseEstimate zero(G.n_locations(), G.n_orient(), M.n_times());
        return solve_bcd(M, G, zero, BlockStepSizes::compute(G), lambda, config.gap_tol,
                         config.max_bcd_iter);
      }
      case Solver::bcd_as:
        return solve_active_set(M, G, std::nullopt, lambda, config);
      case Solver::fista: {
        oracle::ProxGradOptions opts;
        opts.gap_tol = config.gap_tol;
        return oracle::solve_proximal_gradient(M, G, lambda, opts);
      }
      case Solver::fista_as:
        return oracle::solve_proximal_gradient_active_set(M, G, lambda, config);
    }
    throw InvalidArgument("unknown solver");
  };
  const SolveResult result = solve();
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const GapReport gap = duality_gap(M, G, result.estimate, lambda);
  return {solver, lambda_pct, seconds, gap.gap, gap.primal};
}

std::vector<BenchmarkRow> run_benchmark(const Problem& problem, std::span<const Solver> solvers,
                                        std::span<const double> lambda_pcts,
                                        const SolverConfig& config) {
  config.validate();
  std::vector<BenchmarkRow> rows;
  for (double pct : lambda_pcts) {
    for (Solver s : solvers) rows.push_back(run_one(problem, s, pct, config));
  }
  return rows;
}

void write_benchmark_csv(std::ostream& os, std::span<const BenchmarkRow> rows) {
  os << "method,lambda_pct,seconds,final_gap,primal\n";
  for (const auto& r : rows) {
    os << to_string(r.method) << ',' << format_double(r.lambda_pct) << ','
       << format_double(r.seconds) << ',' << format_double(r.final_gap) << ','
       << format_double(r.primal) << '\n';
  }
}

}  // namespace bsmx::bench
