#pragma once

// Amplitude debiasing: one scaling factor d_s >= 1 per active source,
//
//     min_d ||M - sum_s d_s G_s X_s||_Fro^2   s.t.  d_s >= 1,
//
// which keeps orientation and time course of every source and only undoes
// part of the shrinkage.

#include "bsmx/core.hpp"

namespace bsmx {

struct ScalingFactors {
  /// Parallel to the estimate's active set.
  std::vector<Index> locations;
  Vector d;
  Index sweeps = 0;
  bool converged = false;
};

/// Cyclic projected coordinate descent; stops when no factor moves by more
/// than 1e-10 or after 10 sweeps per source.
ScalingFactors estimate_scaling(const Measurements& M, const BlockDesign& G,
                                const BlockSparseEstimate& est);

/// Block s multiplied by d[s].
BlockSparseEstimate apply_scaling(const BlockSparseEstimate& est, const ScalingFactors& factors);

/// ||M - sum_s d_s G_s X_s||_Fro^2
double scaling_objective(const Measurements& M, const BlockDesign& G, const BlockSparseEstimate& est,
                         const Vector& d);

}  // namespace bsmx
