#pragma once

// Solver timing comparison across a lambda grid: BCD and FISTA, each with
// and without the active-set strategy, all stopped at the same gap.

#include <cstdint>
#include <iosfwd>
#include <string>

#include "bsmx/mxne.hpp"

namespace bsmx::bench {

struct ProblemSpec {
  Index n_sensors = 50;
  Index n_locations = 2000;
  Index n_orient = 3;
  Index n_times = 20;
  /// Locations carrying signal in the generated ground truth.
  Index n_active = 10;
  /// Std of the additive white noise.
  double noise = 0.1;
  std::uint64_t seed = 0;
};

struct Problem {
  BlockDesign G;
  Measurements M;
};

/// Standard normal gain with unit columns, standard normal blocks on
/// `n_active` random locations, white noise on top.
Problem make_problem(const ProblemSpec& spec);

enum class Solver { bcd, bcd_as, fista, fista_as };

Solver parse_solver(const std::string& name);
std::string to_string(Solver solver);

struct BenchmarkRow {
  Solver method = Solver::bcd_as;
  double lambda_pct = 0.0;
  double seconds = 0.0;
  double final_gap = 0.0;
  double primal = 0.0;
};

/// Solves the full problem once with `solver`; `final_gap` is the duality
/// gap of the returned estimate on the full problem.
BenchmarkRow run_one(const Problem& problem, Solver solver, double lambda_pct,
                     const SolverConfig& config);

/// Rows ordered by lambda, then by the order of `solvers`.
std::vector<BenchmarkRow> run_benchmark(const Problem& problem, std::span<const Solver> solvers,
                                        std::span<const double> lambda_pcts,
                                        const SolverConfig& config);

/// CSV `method,lambda_pct,seconds,final_gap,primal`.
void write_benchmark_csv(std::ostream& os, std::span<const BenchmarkRow> rows);

}  // namespace bsmx::bench
