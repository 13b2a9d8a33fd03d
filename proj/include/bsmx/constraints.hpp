#pragma once

// Gain transforms applied before solving and the matching estimate maps.
//
// Both transforms right-multiply the gain by a block-diagonal matrix D,
// G~ = G D. An estimate X~ for G~ explains the same data as X = D X~ for G,
// so `to_original` multiplies by D and `to_transformed` divides by it.

#include "bsmx/core.hpp"

namespace bsmx {

/// Loose orientation constraint. Column 0 of every 3-column block is the
/// surface normal; the two tangential columns are scaled by rho.
struct OrientationWeights {
  double rho = 1.0;

  explicit OrientationWeights(double rho_value);
};

/// Depth compensation: block s is multiplied by scale[s] = sigma_max(G_s)^-gamma.
///
/// This is one member of the usual SVD-based depth-weighting family; gamma = 0
/// disables it and gamma = 1 equalizes the largest singular value of every
/// block.
struct DepthWeights {
  double gamma = 0.0;
  Vector per_location_scale;
};

inline constexpr double kDefaultDepthGamma = 0.8;

BlockDesign apply_loose_orientation(const BlockDesign& G, double rho);
BlockSparseEstimate to_original(const BlockSparseEstimate& est, const OrientationWeights& weights);
BlockSparseEstimate to_transformed(const BlockSparseEstimate& est, const OrientationWeights& weights);

std::pair<BlockDesign, DepthWeights> apply_depth_weights(const BlockDesign& G, double gamma);
BlockSparseEstimate to_original(const BlockSparseEstimate& est, const DepthWeights& weights);
BlockSparseEstimate to_transformed(const BlockSparseEstimate& est, const DepthWeights& weights);

}  // namespace bsmx
