#include "bsmx/debias.hpp"

#include <cmath>

namespace bsmx {

namespace {

constexpr double kStepTol = 1e-10;
constexpr Index kSweepsPerSource = 10;

}  // namespace

ScalingFactors estimate_scaling(const Measurements& M, const BlockDesign& G,
                                const BlockSparseEstimate& est) {
  check_dimensions(M, G, est);
  if (est.empty()) throw InvalidArgument("estimate_scaling needs a nonempty estimate");
  const auto n = static_cast<Index>(est.size());

  // A_s = G_s X_s, the sensor-space contribution of each source.
  std::vector<Matrix> contrib;
  Vector energy(n);
  Matrix R = M.entries();
  for (Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    contrib.push_back(G.block(est.active_set()[k]) * est.blocks()[k]);
    energy[i] = contrib.back().squaredNorm();
    R -= contrib.back();
  }

  ScalingFactors out{est.active_set(), Vector::Ones(n), 0, false};
  const Index max_sweeps = kSweepsPerSource * n;
  while (out.sweeps < max_sweeps) {
    double largest_step = 0.0;
    for (Index i = 0; i < n; ++i) {
      // A_s in the null space of G_s: the factor has no effect, keep 1.
      if (!(energy[i] > 0.0)) continue;
      const Matrix& A = contrib[static_cast<std::size_t>(i)];
      const double d_old = out.d[i];
      // <R + d_old A, A> / ||A||^2
      const double unconstrained = R.cwiseProduct(A).sum() / energy[i] + d_old;
      const double d_new = std::max(unconstrained, 1.0);
      if (d_new != d_old) {
        R -= (d_new - d_old) * A;
        out.d[i] = d_new;
        largest_step = std::max(largest_step, std::abs(d_new - d_old));
      }
    }
    ++out.sweeps;
    if (largest_step < kStepTol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

BlockSparseEstimate apply_scaling(const BlockSparseEstimate& est, const ScalingFactors& factors) {
  if (factors.locations != est.active_set()) {
    throw DimensionError("scaling factors do not match the estimate's active set");
  }
  std::vector<Matrix> blocks;
  for (std::size_t i = 0; i < est.size(); ++i) {
    blocks.push_back(est.blocks()[i] * factors.d[static_cast<Index>(i)]);
  }
  return BlockSparseEstimate::from_blocks(est.n_locations(), est.n_orient(), est.n_times(),
                                          est.active_set(), std::move(blocks));
}

double scaling_objective(const Measurements& M, const BlockDesign& G, const BlockSparseEstimate& est,
                         const Vector& d) {
  check_dimensions(M, G, est);
  if (d.size() != static_cast<Index>(est.size())) throw DimensionError("one factor per source");
  Matrix R = M.entries();
  for (std::size_t i = 0; i < est.size(); ++i) {
    R.noalias() -= d[static_cast<Index>(i)] * (G.block(est.active_set()[i]) * est.blocks()[i]);
  }
  return R.squaredNorm();
}

}  // namespace bsmx
