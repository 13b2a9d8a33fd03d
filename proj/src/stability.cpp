#include <algorithm>
#include <exception>
#include <numeric>
#include <random>

#include "bsmx/sim.hpp"

namespace bsmx::sim {

double krippendorff_alpha_binary(const Eigen::MatrixXi& selection) {
  const Index m = selection.rows();
  if (m < 2) throw InvalidArgument("Krippendorff's alpha needs at least two coders");
  if ((selection.array() != 0 && selection.array() != 1).any()) {
    throw InvalidArgument("selection matrix must be 0/1");
  }
  double n0 = 0.0;
  double n1 = 0.0;
  double o01 = 0.0;
  for (Index u = 0; u < selection.cols(); ++u) {
    const double ones = selection.col(u).sum();
    if (ones == 0.0) continue;
    const double zeros = static_cast<double>(m) - ones;
    n0 += zeros;
    n1 += ones;
    o01 += zeros * ones / static_cast<double>(m - 1);
  }
  if (n0 == 0.0 || n1 == 0.0) return 1.0;
  const double n = n0 + n1;
  return 1.0 - (n - 1.0) * o01 / (n0 * n1);
}

StabilityReport resample_stability(std::span<const Matrix> trials, const BlockDesign& G,
                                   const StabilityOptions& options) {
  if (!(options.fraction > 0.0 && options.fraction <= 1.0)) {
    throw InvalidArgument("resample fraction must be in (0, 1]");
  }
  if (options.n_resamples < 2) throw InvalidArgument("need at least two resamples");
  options.config.validate();
  const auto n_trials = static_cast<Index>(trials.size());
  const auto take = static_cast<Index>(std::floor(options.fraction * static_cast<double>(n_trials)));
  if (take < 1) {
    throw InvalidArgument("only " + std::to_string(n_trials) + " trials: fraction " +
                          std::to_string(options.fraction) + " selects none");
  }
  for (const auto& t : trials) check_dimensions(Measurements(t), G);

  const Index S = G.n_locations();
  StabilityReport report;
  report.selection_matrix = Eigen::MatrixXi::Zero(options.n_resamples, S);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(options.n_resamples));

#pragma omp parallel for schedule(dynamic)
  for (Index r = 0; r < options.n_resamples; ++r) {
    try {
      std::seed_seq seq{options.seed, static_cast<std::uint64_t>(r)};
      std::mt19937_64 rng(seq);
      std::vector<Index> idx(static_cast<std::size_t>(n_trials));
      std::iota(idx.begin(), idx.end(), Index{0});
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(static_cast<std::size_t>(take));
      std::sort(idx.begin(), idx.end());
      Matrix avg = Matrix::Zero(G.n_sensors(), trials.front().cols());
      for (Index i : idx) avg += trials[static_cast<std::size_t>(i)];
      avg /= static_cast<double>(take);
      const ReweightResult fit = solve_method(options.method, Measurements(std::move(avg)), G,
                                              options.config);
      for (Index s : fit.estimate.active_set()) report.selection_matrix(r, s) = 1;
    } catch (...) {
      errors[static_cast<std::size_t>(r)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  report.selection_probability =
      report.selection_matrix.cast<double>().colwise().mean().transpose();
  report.krippendorff_alpha = krippendorff_alpha_binary(report.selection_matrix);
  return report;
}

}  // namespace bsmx::sim
