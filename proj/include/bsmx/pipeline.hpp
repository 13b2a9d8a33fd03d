#pragma once

// Full solve on an external problem: optional gain transforms, MxNE or
// irMxNE on the transformed gain, estimate mapped back to the original gain,
// optional debiasing.

#include <optional>

#include "bsmx/constraints.hpp"
#include "bsmx/debias.hpp"
#include "bsmx/irmxne.hpp"

namespace bsmx {

struct PipelineOptions {
  Method method = Method::irmxne;
  SolverConfig config;
  /// Loose orientation weight for the tangential columns (O = 3 only).
  std::optional<double> loose;
  /// Depth weighting exponent.
  std::optional<double> depth;
  bool debias = false;
};

struct PipelineResult {
  /// Gain actually passed to the solver.
  BlockDesign transformed;
  /// Relative lambda is resolved against lambda_max of `transformed`.
  double lambda_max = 0.0;
  ReweightResult fit;
  /// fit.estimate expressed for the original gain.
  BlockSparseEstimate estimate;
  std::optional<ScalingFactors> scaling;
  std::optional<BlockSparseEstimate> debiased;
};

PipelineResult run_pipeline(const Measurements& M, const BlockDesign& G,
                            const PipelineOptions& options);

}  // namespace bsmx
