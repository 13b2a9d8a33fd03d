#pragma once

// Convex mixed-norm estimate
//
//     min_X  1/2 ||M - G X||_Fro^2 + lambda * sum_s ||X_s||_Fro
//
// solved by cyclic block coordinate descent (BCD) inside a forward
// active-set loop. Convergence is certified by the duality gap with the
// dual point obtained by rescaling the residual into the dual-norm ball.

#include <chrono>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>

#include "bsmx/core.hpp"
#include "bsmx/prox.hpp"

namespace bsmx {

struct GapReport {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  Matrix feasible_dual;
};

struct TraceEntry {
  Index iter = 0;
  double gap = 0.0;
  Index active_size = 0;
  double primal = 0.0;
  double seconds = 0.0;
};

/// Per-iteration record of gap, support size, primal value and wall time.
/// Wall time is measured from the construction of the trace.
class ConvergenceTrace {
 public:
  ConvergenceTrace() : start_(std::chrono::steady_clock::now()) {}

  void record(double gap, Index active_size, double primal);
  /// Appends the entries of `other`, renumbering iterations and shifting
  /// times onto this trace's clock.
  void append(const ConvergenceTrace& other);

  const std::vector<TraceEntry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }
  const TraceEntry& back() const { return entries_.back(); }

  /// CSV with header `iter,gap,active_size,primal,seconds`.
  void write_csv(std::ostream& os) const;

 private:
  std::chrono::steady_clock::time_point start_;
  std::vector<TraceEntry> entries_;
};

/// Thrown when an iteration cap is hit before the gap tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, BlockSparseEstimate last, double gap)
      : Error(what + " (gap " + std::to_string(gap) + ")"), last_(std::move(last)), gap_(gap) {}

  const BlockSparseEstimate& last_iterate() const noexcept { return last_; }
  double gap() const noexcept { return gap_; }

 private:
  BlockSparseEstimate last_;
  double gap_;
};

struct SolveResult {
  BlockSparseEstimate estimate;
  ConvergenceTrace trace;
  double gap = 0.0;
  /// BCD sweeps (solve_bcd) or outer active-set iterations (solve_active_set).
  Index iterations = 0;
};

/// 1/2 ||M - G X||^2 + lambda * sum_s ||X_s||_Fro.
double primal_objective(const Measurements& M, const BlockDesign& G, const BlockSparseEstimate& est,
                        double lambda);

/// Scales a residual into the dual feasible set max_s ||G_s^T Y|| <= lambda.
Matrix dual_map(const Matrix& residual_tilde, const BlockDesign& G, double lambda);

/// -1/2 ||Y||^2 + Tr(Y^T M) for a dual-feasible Y.
double dual_objective(const Measurements& M, const Matrix& Y);

GapReport duality_gap(const Measurements& M, const BlockDesign& G, const BlockSparseEstimate& est,
                      double lambda);

/// Smallest lambda with an all-zero solution: max_s ||G_s^T M||_Fro.
double lambda_max(const Measurements& M, const BlockDesign& G);

/// Cyclic BCD restricted to `candidates` (strictly increasing, all with a
/// usable step size). `init` must be supported inside the candidate set.
/// The returned gap is that of the restricted problem.
SolveResult solve_bcd(const Measurements& M, const BlockDesign& G,
                      std::span<const Index> candidates, const BlockSparseEstimate& init,
                      const BlockStepSizes& mu, double lambda, double gap_tol,
                      Index max_sweeps = 100000);

/// BCD over every location with a usable step size.
SolveResult solve_bcd(const Measurements& M, const BlockDesign& G, const BlockSparseEstimate& init,
                      const BlockStepSizes& mu, double lambda, double gap_tol,
                      Index max_sweeps = 100000);

/// Inner solver used by the active-set loop. It receives the design
/// restricted to `locations` (global indices, increasing) and an initial
/// estimate in the restricted indexing.
using RestrictedSolver = std::function<SolveResult(
    const Measurements& M, const BlockDesign& restricted, std::span<const Index> locations,
    const BlockSparseEstimate& init, double lambda, double gap_tol)>;

/// Forward active-set strategy around an arbitrary inner solver.
SolveResult solve_active_set_with(const Measurements& M, const BlockDesign& G,
                                  const std::optional<BlockSparseEstimate>& warm, double lambda,
                                  const SolverConfig& config, const RestrictedSolver& inner);

/// MxNE: active-set strategy around BCD. `lambda` is absolute; the
/// lambda fields of `config` are ignored.
SolveResult solve_active_set(const Measurements& M, const BlockDesign& G,
                             const std::optional<BlockSparseEstimate>& warm, double lambda,
                             const SolverConfig& config);

/// Locations ranked for entry into the active set: at most `batch`
/// locations outside `active` whose score exceeds lambda, largest score
/// first, ties to the lower index. The result is sorted by location.
std::vector<Index> select_violators(const Vector& scores, std::span<const Index> active,
                                    std::span<const Index> excluded, double lambda, Index batch);

}  // namespace bsmx
