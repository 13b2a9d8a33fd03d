#pragma once

#include "bsmx/core.hpp"

namespace bsmx {

/// Per-location BCD step lengths mu[s] = 1 / ||G_s^T G_s||.
///
/// Locations whose gain block is all zero have no step length; they carry
/// mu = 0 and are listed in `degenerate`. Solvers drop them from the
/// candidate set.
struct BlockStepSizes {
  Vector mu;
  std::vector<Index> degenerate;

  static BlockStepSizes compute(const BlockDesign& G);
  bool usable(Index s) const { return mu[s] > 0.0; }
};

/// sigma_max(G_s)^2 from the symmetric eigendecomposition of the O x O Gram
/// matrix. Returns 0 for a zero block.
double gram_spectral_norm(const Eigen::Ref<const Matrix>& block);

/// Lipschitz constant of the data fit restricted to one block.
/// Throws DegenerateBlockError for an all-zero block.
double block_lipschitz(const Eigen::Ref<const Matrix>& block);

/// Proximal operator of threshold * ||.||_Fro (group soft-thresholding).
/// Returns an exact zero block when ||x||_Fro <= threshold, otherwise
/// x * (1 - threshold / ||x||_Fro).
Matrix group_soft_threshold(const Eigen::Ref<const Matrix>& x, double threshold);

}  // namespace bsmx
