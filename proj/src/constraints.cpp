#include "bsmx/constraints.hpp"

#include <cmath>

#include "bsmx/kernels.hpp"

namespace bsmx {

namespace {

template <class BlockFn>
BlockSparseEstimate map_blocks(const BlockSparseEstimate& est, BlockFn fn) {
  std::vector<Matrix> blocks;
  blocks.reserve(est.size());
  for (std::size_t i = 0; i < est.size(); ++i) {
    blocks.push_back(fn(est.active_set()[i], est.blocks()[i]));
  }
  return BlockSparseEstimate::from_blocks(est.n_locations(), est.n_orient(), est.n_times(),
                                          est.active_set(), std::move(blocks));
}

void require_three_orientations(Index n_orient) {
  if (n_orient != 3) {
    throw InvalidArgument("loose orientation needs n_orient = 3, got " + std::to_string(n_orient));
  }
}

}  // namespace

OrientationWeights::OrientationWeights(double rho_value) : rho(rho_value) {
  if (!(rho > 0.0 && rho <= 1.0)) throw InvalidArgument("rho must lie in (0, 1]");
}

BlockDesign apply_loose_orientation(const BlockDesign& G, double rho) {
  const OrientationWeights weights(rho);
  require_three_orientations(G.n_orient());
  Matrix out = G.entries();
  for (Index s = 0; s < G.n_locations(); ++s) out.middleCols(s * 3 + 1, 2) *= weights.rho;
  return BlockDesign(std::move(out), 3);
}

BlockSparseEstimate to_original(const BlockSparseEstimate& est, const OrientationWeights& weights) {
  require_three_orientations(est.n_orient());
  return map_blocks(est, [&](Index, const Matrix& b) {
    Matrix out = b;
    out.bottomRows(2) *= weights.rho;
    return out;
  });
}

BlockSparseEstimate to_transformed(const BlockSparseEstimate& est, const OrientationWeights& weights) {
  require_three_orientations(est.n_orient());
  return map_blocks(est, [&](Index, const Matrix& b) {
    Matrix out = b;
    out.bottomRows(2) /= weights.rho;
    return out;
  });
}

std::pair<BlockDesign, DepthWeights> apply_depth_weights(const BlockDesign& G, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidArgument("gamma must lie in [0, 1]");
  const Vector L = kernels::block_lipschitz_all(G);
  DepthWeights weights{gamma, Vector::Ones(G.n_locations())};
  for (Index s = 0; s < G.n_locations(); ++s) {
    if (!(L[s] > 0.0)) {
      throw DegenerateBlockError("depth weighting: gain block " + std::to_string(s) + " is zero");
    }
    // sigma_max^-gamma = L^(-gamma/2)
    if (gamma != 0.0) weights.per_location_scale[s] = std::pow(L[s], -0.5 * gamma);
  }
  const auto& scale = weights.per_location_scale;
  BlockDesign out = G.scaled(std::span<const double>(scale.data(), static_cast<std::size_t>(scale.size())));
  return {std::move(out), std::move(weights)};
}

BlockSparseEstimate to_original(const BlockSparseEstimate& est, const DepthWeights& weights) {
  if (weights.per_location_scale.size() != est.n_locations()) {
    throw DimensionError("depth weights do not match the estimate");
  }
  return map_blocks(est, [&](Index s, const Matrix& b) -> Matrix {
    return b * weights.per_location_scale[s];
  });
}

BlockSparseEstimate to_transformed(const BlockSparseEstimate& est, const DepthWeights& weights) {
  if (weights.per_location_scale.size() != est.n_locations()) {
    throw DimensionError("depth weights do not match the estimate");
  }
  return map_blocks(est, [&](Index s, const Matrix& b) -> Matrix {
    return b / weights.per_location_scale[s];
  });
}

}  // namespace bsmx
