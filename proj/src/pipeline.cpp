#include "bsmx/pipeline.hpp"

namespace bsmx {

PipelineResult run_pipeline(const Measurements& M, const BlockDesign& G,
                            const PipelineOptions& options) {
  options.config.validate();
  check_dimensions(M, G);

  BlockDesign work = G;
  std::optional<OrientationWeights> orient;
  std::optional<DepthWeights> depth;
  if (options.loose) {
    orient.emplace(*options.loose);
    work = apply_loose_orientation(work, *options.loose);
  }
  if (options.depth) {
    auto [weighted, weights] = apply_depth_weights(work, *options.depth);
    work = std::move(weighted);
    depth = std::move(weights);
  }

  const double lmax = lambda_max(M, work);
  ReweightResult fit = solve_method(options.method, M, work, options.config);

  // G~ = G D_orient D_depth, so undo depth first, then orientation.
  BlockSparseEstimate est = fit.estimate;
  if (depth) est = to_original(est, *depth);
  if (orient) est = to_original(est, *orient);

  PipelineResult out{std::move(work), lmax, std::move(fit), std::move(est), std::nullopt,
                     std::nullopt};
  if (options.debias) {
    if (out.estimate.empty()) {
      out.debiased = out.estimate;
    } else {
      out.scaling = estimate_scaling(M, G, out.estimate);
      out.debiased = apply_scaling(out.estimate, *out.scaling);
    }
  }
  return out;
}

}  // namespace bsmx
