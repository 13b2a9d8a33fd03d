#include "bsmx/oracle.hpp"

#include <cmath>

namespace bsmx::oracle {

namespace {

double penalty_of(const Vector& c, Index s) { return c.size() == 0 ? 1.0 : c[s]; }

double weighted_l21(const Matrix& X, Index O, const Vector& c) {
  double total = 0.0;
  for (Index s = 0; s < X.rows() / O; ++s) total += penalty_of(c, s) * X.middleRows(s * O, O).norm();
  return total;
}

}  // namespace

double global_lipschitz(const BlockDesign& G) {
  const Matrix& A = G.entries();
  if (A.cols() == 0) return 0.0;
  // Deterministic, generic start vector.
  Vector v(A.cols());
  for (Index i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.5 * std::sin(1.0 + static_cast<double>(i));
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Vector w = A.transpose() * (A * v);
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    v = w / next;
    const bool done = std::abs(next - estimate) <= 1e-12 * next;
    estimate = next;
    if (done) break;
  }
  return estimate;
}

DenseGap dense_gap(const Matrix& M, const Matrix& G, Index O, const Matrix& X, double lambda,
                   const Vector& c) {
  const Matrix R = M - G * X;
  const Matrix corr = G.transpose() * R;
  double scale = 1.0;
  for (Index s = 0; s < X.rows() / O; ++s) {
    scale = std::max(scale, corr.middleRows(s * O, O).norm() / (lambda * penalty_of(c, s)));
  }
  const Matrix Y = R / scale;
  const double primal = 0.5 * R.squaredNorm() + lambda * weighted_l21(X, O, c);
  const double dual = -0.5 * Y.squaredNorm() + (Y.array() * M.array()).sum();
  return {primal, dual, primal - dual};
}

SolveResult solve_proximal_gradient(const Measurements& Mm, const BlockDesign& Gd, double lambda,
                                    const ProxGradOptions& options) {
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  check_dimensions(Mm, Gd);
  const Matrix& M = Mm.entries();
  const Matrix& G = Gd.entries();
  const Index O = Gd.n_orient();
  const Index S = Gd.n_locations();
  const Vector& c = options.block_penalty;
  if (c.size() != 0 && c.size() != S) throw DimensionError("block_penalty must have one entry per block");
  if (c.size() != 0 && !(c.array() > 0.0).all()) throw InvalidArgument("block_penalty must be > 0");

  SolveResult result{BlockSparseEstimate(S, O, Mm.n_times()), {}, 0.0, 0};
  Matrix X = Matrix::Zero(G.cols(), M.cols());
  if (options.init) {
    check_dimensions(Mm, Gd, *options.init);
    X = densify(*options.init);
  }
  auto record = [&](const Matrix& Xc) {
    const DenseGap g = dense_gap(M, G, O, Xc, lambda, c);
    Index active = 0;
    for (Index s = 0; s < S; ++s) active += (Xc.middleRows(s * O, O).array() != 0.0).any() ? 1 : 0;
    result.trace.record(g.gap, active, g.primal);
    return g.gap;
  };

  double gap = S == 0 ? 0.0 : record(X);
  if (gap < options.gap_tol || S == 0) {
    result.estimate = sparsify(X, O);
    result.gap = gap;
    return result;
  }

  const double L = global_lipschitz(Gd);
  const double step = 1.0 / L;
  Matrix GX = G * X;
  Matrix Z = X;
  Matrix GZ = GX;
  double t = 1.0;
  double objective = 0.5 * (M - GX).squaredNorm() + lambda * weighted_l21(X, O, c);
  bool momentum = false;

  Index it = 0;
  while (it < options.max_iter) {
    ++it;
    Matrix V = Z + step * (G.transpose() * (M - GZ));
    Matrix Xn(V.rows(), V.cols());
    for (Index s = 0; s < S; ++s) {
      auto v = V.middleRows(s * O, O);
      const double thr = step * lambda * penalty_of(c, s);
      const double norm = v.norm();
      if (norm <= thr) {
        Xn.middleRows(s * O, O).setZero();
      } else {
        Xn.middleRows(s * O, O) = v * (1.0 - thr / norm);
      }
    }
    Matrix GXn = G * Xn;
    const double obj_n = 0.5 * (M - GXn).squaredNorm() + lambda * weighted_l21(Xn, O, c);

    if (obj_n > objective && momentum) {
      // Restart from the last accepted point with a plain gradient step.
      t = 1.0;
      Z = X;
      GZ = GX;
      momentum = false;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    Z = Xn + beta * (Xn - X);
    GZ = GXn + beta * (GXn - GX);
    momentum = beta != 0.0;
    X = std::move(Xn);
    GX = std::move(GXn);
    objective = obj_n;
    t = t_next;

    if (it % options.gap_every == 0) {
      gap = record(X);
      if (gap < options.gap_tol) break;
    }
  }
  if (gap >= options.gap_tol) {
    gap = record(X);
    if (gap >= options.gap_tol) {
      throw ConvergenceError("proximal gradient did not reach the gap tolerance", sparsify(X, O), gap);
    }
  }
  result.estimate = sparsify(X, O);
  result.gap = gap;
  result.iterations = it;
  return result;
}

SolveResult solve_proximal_gradient_active_set(const Measurements& M, const BlockDesign& G,
                                               double lambda, const SolverConfig& config) {
  RestrictedSolver fista = [&](const Measurements& Mr, const BlockDesign& GA,
                               std::span<const Index>, const BlockSparseEstimate& init, double lam,
                               double tol) {
    ProxGradOptions opts;
    opts.gap_tol = tol;
    opts.init = init;
    return solve_proximal_gradient(Mr, GA, lam, opts);
  };
  return solve_active_set_with(M, G, std::nullopt, lambda, config, fista);
}

}  // namespace bsmx::oracle
