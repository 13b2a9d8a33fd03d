#pragma once

// Domain types of the block-sparse multiple-measurement-vector model
//
//     M = G X + E,   G in R^{N x (S*O)},  X in R^{(S*O) x T}
//
// X is partitioned into S row blocks X_s of shape O x T, one per source
// location. Block s of the gain occupies columns [s*O, (s+1)*O).

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bsmx/error.hpp"

namespace bsmx {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Gain matrix with its block layout. Immutable after construction.
class BlockDesign {
 public:
  BlockDesign(Matrix entries, Index n_orient);

  const Matrix& entries() const noexcept { return entries_; }
  Index n_sensors() const noexcept { return entries_.rows(); }
  Index n_locations() const noexcept { return n_locations_; }
  Index n_orient() const noexcept { return n_orient_; }

  /// N x O view of the columns belonging to location s.
  auto block(Index s) const { return entries_.middleCols(s * n_orient_, n_orient_); }

  /// Design made of the listed locations only, in the given order.
  BlockDesign restrict_to(std::span<const Index> locations) const;

  /// Block s multiplied by factors[s]. factors.size() must equal n_locations().
  BlockDesign scaled(std::span<const double> factors) const;

 private:
  Matrix entries_;
  Index n_orient_;
  Index n_locations_;
};

/// Whitened sensor data, N x T.
class Measurements {
 public:
  explicit Measurements(Matrix entries);

  const Matrix& entries() const noexcept { return entries_; }
  Index n_sensors() const noexcept { return entries_.rows(); }
  Index n_times() const noexcept { return entries_.cols(); }

 private:
  Matrix entries_;
};

/// Row-block sparse coefficient matrix. Only nonzero blocks are stored and
/// the active set is strictly increasing.
class BlockSparseEstimate {
 public:
  /// Empty estimate (X = 0).
  BlockSparseEstimate(Index n_locations, Index n_orient, Index n_times);

  /// Builds an estimate from (location, block) pairs. Locations must be
  /// strictly increasing; blocks that are exactly zero are dropped.
  static BlockSparseEstimate from_blocks(Index n_locations, Index n_orient, Index n_times,
                                         std::vector<Index> locations,
                                         std::vector<Matrix> blocks);

  Index n_locations() const noexcept { return n_locations_; }
  Index n_orient() const noexcept { return n_orient_; }
  Index n_times() const noexcept { return n_times_; }

  const std::vector<Index>& active_set() const noexcept { return active_; }
  const std::vector<Matrix>& blocks() const noexcept { return blocks_; }
  std::size_t size() const noexcept { return active_.size(); }
  bool empty() const noexcept { return active_.empty(); }

  /// Block stored for location s, or nullptr when s is inactive.
  const Matrix* find(Index s) const;

  /// Sum over blocks of the Frobenius norm, i.e. the l21 penalty value.
  double l21_norm() const;

 private:
  Index n_locations_;
  Index n_orient_;
  Index n_times_;
  std::vector<Index> active_;
  std::vector<Matrix> blocks_;
};

/// Solver parameters shared by the convex and reweighted solvers.
struct SolverConfig {
  double lambda = 0.5;
  /// When set, lambda is a fraction of lambda_max of the design handed to
  /// the solver (0.5 means 50%).
  bool lambda_is_relative = true;
  double gap_tol = 1e-6;
  double reweight_tol = 1e-6;
  int max_reweight = 30;
  Index active_batch = 10;
  Index max_bcd_iter = 100000;

  void validate() const;
  /// Absolute lambda given the lambda_max of the problem.
  double resolve_lambda(double lambda_max) const;
};

/// Full (S*O) x T matrix. Inactive blocks are zero.
Matrix densify(const BlockSparseEstimate& est);

/// Inverse of densify: keeps row blocks that have at least one nonzero.
BlockSparseEstimate sparsify(const Matrix& X, Index n_orient);

/// G X accumulated over the active blocks only.
Matrix predict(const BlockDesign& G, const BlockSparseEstimate& est);

/// M - G X accumulated over the active blocks only.
Matrix residual(const Measurements& M, const BlockDesign& G, const BlockSparseEstimate& est);

/// Throws DimensionError unless M, G and est describe the same problem.
void check_dimensions(const Measurements& M, const BlockDesign& G, const BlockSparseEstimate& est);
void check_dimensions(const Measurements& M, const BlockDesign& G);

}  // namespace bsmx
