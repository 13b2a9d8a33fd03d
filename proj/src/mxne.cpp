#include "bsmx/mxne.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>

#include "bsmx/io.hpp"
#include "bsmx/kernels.hpp"

namespace bsmx {

namespace {

// Full residual recomputation period, in sweeps.
constexpr Index kResyncEvery = 50;

struct GapParts {
  double primal;
  double dual;
  double gap;
};

// Gap from an already computed residual and correlation norms.
GapParts gap_from_residual(const Matrix& M, const Matrix& R, const Vector& corr_norms,
                           double penalty_sum, double lambda) {
  const double max_corr = corr_norms.size() > 0 ? corr_norms.maxCoeff() : 0.0;
  const double scale = std::max(max_corr / lambda, 1.0);
  const double primal = 0.5 * R.squaredNorm() + lambda * penalty_sum;
  // Y = R / scale; -1/2 ||Y||^2 + <Y, M>
  const double dual = -0.5 * R.squaredNorm() / (scale * scale) + R.cwiseProduct(M).sum() / scale;
  return {primal, dual, primal - dual};
}

void require_positive(double value, const char* what) {
  if (!(value > 0.0)) throw InvalidArgument(std::string(what) + " must be > 0");
}

}  // namespace

void ConvergenceTrace::record(double gap, Index active_size, double primal) {
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  entries_.push_back({static_cast<Index>(entries_.size()), gap, active_size, primal, seconds});
}

void ConvergenceTrace::append(const ConvergenceTrace& other) {
  const double offset = std::chrono::duration<double>(other.start_ - start_).count();
  for (TraceEntry e : other.entries_) {
    e.iter = static_cast<Index>(entries_.size());
    e.seconds += offset;
    entries_.push_back(e);
  }
}

void ConvergenceTrace::write_csv(std::ostream& os) const {
  os << "iter,gap,active_size,primal,seconds\n";
  for (const auto& e : entries_) {
    os << e.iter << ',' << format_double(e.gap) << ',' << e.active_size << ','
       << format_double(e.primal) << ',' << format_double(e.seconds) << '\n';
  }
}

double primal_objective(const Measurements& M, const BlockDesign& G, const BlockSparseEstimate& est,
                        double lambda) {
  require_positive(lambda, "lambda");
  return 0.5 * residual(M, G, est).squaredNorm() + lambda * est.l21_norm();
}

Matrix dual_map(const Matrix& residual_tilde, const BlockDesign& G, double lambda) {
  require_positive(lambda, "lambda");
  const Vector norms = kernels::block_correlation_norms(G, residual_tilde);
  const double max_corr = norms.size() > 0 ? norms.maxCoeff() : 0.0;
  const double scale = std::max(max_corr / lambda, 1.0);
  if (scale == 1.0) return residual_tilde;
  return residual_tilde / scale;
}

double dual_objective(const Measurements& M, const Matrix& Y) {
  if (Y.rows() != M.n_sensors() || Y.cols() != M.n_times()) {
    throw DimensionError("dual variable shape does not match the measurements");
  }
  return -0.5 * Y.squaredNorm() + Y.cwiseProduct(M.entries()).sum();
}

GapReport duality_gap(const Measurements& M, const BlockDesign& G, const BlockSparseEstimate& est,
                      double lambda) {
  require_positive(lambda, "lambda");
  const Matrix R = residual(M, G, est);
  GapReport report;
  report.primal = 0.5 * R.squaredNorm() + lambda * est.l21_norm();
  report.feasible_dual = dual_map(R, G, lambda);
  report.dual = dual_objective(M, report.feasible_dual);
  report.gap = report.primal - report.dual;
  return report;
}

double lambda_max(const Measurements& M, const BlockDesign& G) {
  check_dimensions(M, G);
  if (G.n_locations() == 0) return 0.0;
  return kernels::block_correlation_norms(G, M.entries()).maxCoeff();
}

SolveResult solve_bcd(const Measurements& M, const BlockDesign& G,
                      std::span<const Index> candidates, const BlockSparseEstimate& init,
                      const BlockStepSizes& mu, double lambda, double gap_tol, Index max_sweeps) {
  require_positive(lambda, "lambda");
  require_positive(gap_tol, "gap_tol");
  check_dimensions(M, G, init);
  if (mu.mu.size() != G.n_locations()) throw DimensionError("step sizes do not match the gain");
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (i > 0 && candidates[i] <= candidates[i - 1]) {
      throw InvalidArgument("candidate set must be strictly increasing");
    }
    if (candidates[i] < 0 || candidates[i] >= G.n_locations()) {
      throw InvalidArgument("candidate location out of range");
    }
    if (!mu.usable(candidates[i])) {
      throw DegenerateBlockError("candidate " + std::to_string(candidates[i]) +
                                 " has a degenerate design block");
    }
  }
  for (Index s : init.active_set()) {
    if (!std::binary_search(candidates.begin(), candidates.end(), s)) {
      throw InvalidArgument("initial estimate is active outside the candidate set");
    }
  }

  const Index O = G.n_orient();
  const Index T = M.n_times();
  const BlockDesign GC = G.restrict_to(candidates);
  const auto n = static_cast<std::size_t>(candidates.size());

  std::vector<Matrix> X(n, Matrix::Zero(O, T));
  Vector step(static_cast<Index>(n));
  for (std::size_t c = 0; c < n; ++c) {
    step[static_cast<Index>(c)] = mu.mu[candidates[c]];
    if (const Matrix* b = init.find(candidates[c])) X[c] = *b;
  }

  auto full_residual = [&] {
    Matrix R = M.entries();
    for (std::size_t c = 0; c < n; ++c) {
      if (!(X[c].array() == 0.0).all()) R.noalias() -= GC.block(static_cast<Index>(c)) * X[c];
    }
    return R;
  };
  auto support_and_penalty = [&] {
    Index active = 0;
    double penalty = 0.0;
    for (const auto& b : X) {
      const double norm = b.norm();
      if (norm > 0.0) {
        ++active;
        penalty += norm;
      }
    }
    return std::pair{active, penalty};
  };

  SolveResult result{BlockSparseEstimate(G.n_locations(), O, T), {}, 0.0, 0};
  Matrix R = full_residual();
  auto evaluate = [&] {
    const auto [active, penalty] = support_and_penalty();
    const Vector corr = kernels::block_correlation_norms(GC, R);
    const GapParts parts = gap_from_residual(M.entries(), R, corr, penalty, lambda);
    result.trace.record(parts.gap, active, parts.primal);
    return parts.gap;
  };
  auto to_estimate = [&] {
    std::vector<Index> locs(candidates.begin(), candidates.end());
    return BlockSparseEstimate::from_blocks(G.n_locations(), O, T, std::move(locs), X);
  };

  double gap = evaluate();
  Index sweeps = 0;
  Matrix Xbar(O, T);
  Matrix delta(O, T);
  while (gap >= gap_tol) {
    if (sweeps >= max_sweeps) {
      throw ConvergenceError("BCD did not reach the gap tolerance in " +
                                 std::to_string(max_sweeps) + " sweeps",
                             to_estimate(), gap);
    }
    for (std::size_t c = 0; c < n; ++c) {
      const auto Gc = GC.block(static_cast<Index>(c));
      const double mu_c = step[static_cast<Index>(c)];
      Xbar.noalias() = Gc.transpose() * R;
      Xbar = X[c] + mu_c * Xbar;
      const double norm = Xbar.norm();
      const double threshold = mu_c * lambda;
      if (norm <= threshold) {
        if ((X[c].array() == 0.0).all()) continue;
        R.noalias() += Gc * X[c];
        X[c].setZero();
        continue;
      }
      Xbar *= 1.0 - threshold / norm;
      delta = Xbar - X[c];
      R.noalias() -= Gc * delta;
      X[c] = Xbar;
    }
    ++sweeps;
    if (sweeps % kResyncEvery == 0) R = full_residual();
    gap = evaluate();
  }

  result.estimate = to_estimate();
  result.gap = gap;
  result.iterations = sweeps;
  return result;
}

SolveResult solve_bcd(const Measurements& M, const BlockDesign& G, const BlockSparseEstimate& init,
                      const BlockStepSizes& mu, double lambda, double gap_tol, Index max_sweeps) {
  std::vector<Index> candidates;
  for (Index s = 0; s < G.n_locations(); ++s) {
    if (mu.usable(s)) candidates.push_back(s);
  }
  return solve_bcd(M, G, candidates, init, mu, lambda, gap_tol, max_sweeps);
}

std::vector<Index> select_violators(const Vector& scores, std::span<const Index> active,
                                    std::span<const Index> excluded, double lambda, Index batch) {
  std::vector<Index> pool;
  for (Index s = 0; s < scores.size(); ++s) {
    if (!(scores[s] > lambda)) continue;
    if (std::binary_search(active.begin(), active.end(), s)) continue;
    if (std::binary_search(excluded.begin(), excluded.end(), s)) continue;
    pool.push_back(s);
  }
  auto by_score = [&](Index a, Index b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  const auto keep = std::min<std::size_t>(pool.size(), static_cast<std::size_t>(batch));
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(),
                    by_score);
  pool.resize(keep);
  std::sort(pool.begin(), pool.end());
  return pool;
}

SolveResult solve_active_set_with(const Measurements& M, const BlockDesign& G,
                                  const std::optional<BlockSparseEstimate>& warm, double lambda,
                                  const SolverConfig& config, const RestrictedSolver& inner) {
  require_positive(lambda, "lambda");
  require_positive(config.gap_tol, "gap_tol");
  if (config.active_batch < 1) throw InvalidArgument("active_batch must be >= 1");
  check_dimensions(M, G);

  const Index S = G.n_locations();
  const Index O = G.n_orient();
  const Index T = M.n_times();

  const Vector lipschitz = kernels::block_lipschitz_all(G);
  std::vector<Index> degenerate;
  for (Index s = 0; s < S; ++s) {
    if (!(lipschitz[s] > 0.0)) degenerate.push_back(s);
  }
  if (!degenerate.empty()) {
    std::clog << "warning: " << degenerate.size()
              << " all-zero gain block(s) excluded from the candidate set\n";
  }

  // Current iterate in global indexing; degenerate blocks never enter.
  BlockSparseEstimate X(S, O, T);
  if (warm) {
    check_dimensions(M, G, *warm);
    std::vector<Index> locs;
    std::vector<Matrix> blocks;
    for (std::size_t i = 0; i < warm->size(); ++i) {
      const Index s = warm->active_set()[i];
      if (std::binary_search(degenerate.begin(), degenerate.end(), s)) continue;
      locs.push_back(s);
      blocks.push_back(warm->blocks()[i]);
    }
    X = BlockSparseEstimate::from_blocks(S, O, T, std::move(locs), std::move(blocks));
  }
  std::vector<Index> active = X.active_set();

  SolveResult result{X, {}, 0.0, 0};
  Matrix R = residual(M, G, X);
  Vector scores = kernels::block_correlation_norms(G, R);
  GapParts parts = gap_from_residual(M.entries(), R, scores, X.l21_norm(), lambda);
  result.trace.record(parts.gap, static_cast<Index>(X.size()), parts.primal);

  const Index max_outer = S / config.active_batch + 10;
  Index outer = 0;
  for (;;) {
    const std::vector<Index> violators =
        select_violators(scores, active, degenerate, lambda, config.active_batch);
    if (parts.gap < config.gap_tol && violators.empty()) break;
    if (active.empty() && violators.empty()) break;  // X = 0 is optimal
    if (outer >= max_outer) {
      throw ConvergenceError("active-set loop exceeded " + std::to_string(max_outer) +
                                 " outer iterations",
                             X, parts.gap);
    }

    std::vector<Index> merged;
    std::set_union(active.begin(), active.end(), violators.begin(), violators.end(),
                   std::back_inserter(merged));
    active = std::move(merged);

    const BlockDesign GA = G.restrict_to(active);
    std::vector<Index> local;
    std::vector<Matrix> local_blocks;
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (const Matrix* b = X.find(active[i])) {
        local.push_back(static_cast<Index>(i));
        local_blocks.push_back(*b);
      }
    }
    const auto init = BlockSparseEstimate::from_blocks(static_cast<Index>(active.size()), O, T,
                                                       std::move(local), std::move(local_blocks));

    auto to_global = [&](const BlockSparseEstimate& restricted) {
      std::vector<Index> locs;
      for (Index i : restricted.active_set()) locs.push_back(active[static_cast<std::size_t>(i)]);
      return BlockSparseEstimate::from_blocks(S, O, T, std::move(locs), restricted.blocks());
    };

    SolveResult restricted = [&] {
      try {
        return inner(M, GA, active, init, lambda, config.gap_tol);
      } catch (const ConvergenceError& e) {
        throw ConvergenceError(e.what(), to_global(e.last_iterate()), e.gap());
      }
    }();
    result.trace.append(restricted.trace);
    X = to_global(restricted.estimate);

    R = residual(M, G, X);
    scores = kernels::block_correlation_norms(G, R);
    parts = gap_from_residual(M.entries(), R, scores, X.l21_norm(), lambda);
    result.trace.record(parts.gap, static_cast<Index>(X.size()), parts.primal);
    ++outer;
  }

  result.estimate = std::move(X);
  result.gap = parts.gap;
  result.iterations = outer;
  return result;
}

SolveResult solve_active_set(const Measurements& M, const BlockDesign& G,
                             const std::optional<BlockSparseEstimate>& warm, double lambda,
                             const SolverConfig& config) {
  const BlockStepSizes mu = BlockStepSizes::compute(G);
  const Index max_sweeps = config.max_bcd_iter;
  RestrictedSolver bcd = [&](const Measurements& Mr, const BlockDesign& GA,
                             std::span<const Index> locations, const BlockSparseEstimate& init,
                             double lam, double tol) {
    BlockStepSizes local;
    local.mu.resize(static_cast<Index>(locations.size()));
    for (std::size_t i = 0; i < locations.size(); ++i) {
      local.mu[static_cast<Index>(i)] = mu.mu[locations[i]];
    }
    return solve_bcd(Mr, GA, init, local, lam, tol, max_sweeps);
  };
  return solve_active_set_with(M, G, warm, lambda, config, bcd);
}

}  // namespace bsmx
