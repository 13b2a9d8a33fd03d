#pragma once

// Reference solvers for cross-checking the BCD solvers.
//
// Everything here works on the full dense coefficient matrix and computes
// its own duality gap, sharing no code path with mxne beyond the domain
// types. Not tuned for speed.

#include "bsmx/mxne.hpp"

namespace bsmx::oracle {

/// ||G^T G|| by power iteration (fixed start vector, at most 1000
/// iterations, relative change below 1e-12).
double global_lipschitz(const BlockDesign& G);

struct ProxGradOptions {
  double gap_tol = 1e-6;
  Index max_iter = 500000;
  /// Evaluate the duality gap every this many iterations.
  Index gap_every = 10;
  /// Optional per-block penalty multipliers c_s > 0: the penalty becomes
  /// lambda * sum_s c_s ||X_s||_Fro. Empty means all ones.
  Vector block_penalty;
  /// Starting point; zero when absent.
  std::optional<BlockSparseEstimate> init;
};

/// Accelerated proximal gradient (FISTA) with global step 1/L and
/// momentum restart whenever the objective increases.
SolveResult solve_proximal_gradient(const Measurements& M, const BlockDesign& G, double lambda,
                                    const ProxGradOptions& options = {});

/// Primal value and duality gap for the (optionally weighted) problem,
/// computed from a dense G^T R.
struct DenseGap {
  double primal;
  double dual;
  double gap;
};
DenseGap dense_gap(const Matrix& M, const Matrix& G, Index n_orient, const Matrix& X, double lambda,
                   const Vector& block_penalty = {});

/// The active-set strategy of mxne with FISTA as the inner solver.
SolveResult solve_proximal_gradient_active_set(const Measurements& M, const BlockDesign& G,
                                               double lambda, const SolverConfig& config);

}  // namespace bsmx::oracle
