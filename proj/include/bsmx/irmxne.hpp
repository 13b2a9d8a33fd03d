#pragma once

// Iterative reweighted mixed-norm estimate
//
//     min_X  1/2 ||M - G X||_Fro^2 + lambda * sum_s sqrt(||X_s||_Fro)
//
// minimized by majorization-minimization: each iteration solves a weighted
// MxNE whose weights come from the previous estimate. The weights are
// folded into the gain (G_s <- w[s] G_s) so that zero weights simply drop
// the location instead of producing an infinite penalty.

#include <iosfwd>
#include <string>

#include "bsmx/mxne.hpp"

namespace bsmx {

/// 1/2 ||M - G X||^2 + lambda * sum_s sqrt(||X_s||_Fro).
double nonconvex_objective(const Measurements& M, const BlockDesign& G,
                           const BlockSparseEstimate& est, double lambda);

/// w[s] = 2 sqrt(||X_s||_Fro) for active s, 0 otherwise. No smoothing.
Vector compute_weights(const BlockSparseEstimate& prev);

struct ReweightState {
  /// weights[k] is the weight vector used by iteration k+1.
  std::vector<Vector> weights;
  int iterations = 0;
  /// Non-convex objective after each iteration.
  std::vector<double> objective_trace;
  /// False when the iteration cap was reached before the stopping rule.
  bool converged = false;

  /// {"iterations", "converged", "objective_trace", "weights": [[...], ...]}
  void write_json(std::ostream& os) const;
};

struct ReweightResult {
  BlockSparseEstimate estimate;
  ReweightState state;
  ConvergenceTrace trace;
  /// Estimate after each iteration; iterates.front() is the plain MxNE.
  std::vector<BlockSparseEstimate> iterates;
  double lambda = 0.0;
};

/// Runs at most config.max_reweight iterations; stops when the densified
/// max-abs change between consecutive estimates drops below reweight_tol.
/// A relative lambda is resolved against lambda_max(M, G).
ReweightResult solve_irmxne(const Measurements& M, const BlockDesign& G, const SolverConfig& config);

/// Same, with an absolute lambda (config's lambda fields ignored).
ReweightResult solve_irmxne(const Measurements& M, const BlockDesign& G, double lambda,
                            const SolverConfig& config);

enum class Method { mxne, irmxne };

Method parse_method(const std::string& name);
std::string to_string(Method method);

/// MxNE is irMxNE stopped after its first iteration.
ReweightResult solve_method(Method method, const Measurements& M, const BlockDesign& G,
                            const SolverConfig& config);

}  // namespace bsmx
