#pragma once

#include <random>

#include "bsmx/core.hpp"

namespace bsmx::test {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double normal() { return normal_(eng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  Index integer(Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(eng_); }

  Matrix normal_matrix(Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) m(i, j) = normal();
    }
    return m;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_;
};

inline BlockDesign random_design(Rng& rng, Index N, Index S, Index O) {
  Matrix g = rng.normal_matrix(N, S * O);
  g.colwise().normalize();
  return BlockDesign(std::move(g), O);
}

/// `n_active` random locations with standard normal blocks.
inline BlockSparseEstimate random_estimate(Rng& rng, Index S, Index O, Index T, Index n_active) {
  std::vector<Index> all(static_cast<std::size_t>(S));
  for (Index s = 0; s < S; ++s) all[static_cast<std::size_t>(s)] = s;
  std::shuffle(all.begin(), all.end(), rng.engine());
  all.resize(static_cast<std::size_t>(n_active));
  std::sort(all.begin(), all.end());
  std::vector<Matrix> blocks;
  for (std::size_t i = 0; i < all.size(); ++i) blocks.push_back(rng.normal_matrix(O, T));
  return BlockSparseEstimate::from_blocks(S, O, T, all, std::move(blocks));
}

struct Instance {
  BlockDesign G;
  Measurements M;
};

/// Planted sparse signal plus white noise.
inline Instance random_instance(Rng& rng, Index N, Index S, Index O, Index T, Index n_active = 3,
                                double noise = 0.2) {
  BlockDesign G = random_design(rng, N, S, O);
  const BlockSparseEstimate truth = random_estimate(rng, S, O, T, n_active);
  Matrix m = predict(G, truth) + noise * rng.normal_matrix(N, T);
  return {std::move(G), Measurements(std::move(m))};
}

/// ||G_s^T R||_Fro for every s, from one dense product.
inline Vector dense_correlation_norms(const Matrix& G, Index O, const Matrix& R) {
  const Matrix C = G.transpose() * R;
  Vector out(G.cols() / O);
  for (Index s = 0; s < out.size(); ++s) out[s] = C.middleRows(s * O, O).norm();
  return out;
}

struct KktReport {
  /// max over inactive s of ||G_s^T R|| / lambda.
  double inactive_ratio = 0.0;
  /// max over active s of ||G_s^T R - lambda X_s / ||X_s|| ||_Fro.
  double stationarity = 0.0;
};

/// Exhaustive optimality check over all locations, from a dense G^T R.
inline KktReport kkt_report(const Matrix& M, const BlockDesign& G, const BlockSparseEstimate& est,
                            double lambda) {
  const Index O = G.n_orient();
  const Matrix R = M - G.entries() * densify(est);
  const Matrix C = G.entries().transpose() * R;
  KktReport out;
  for (Index s = 0; s < G.n_locations(); ++s) {
    const auto c = C.middleRows(s * O, O);
    if (const Matrix* x = est.find(s)) {
      out.stationarity = std::max(out.stationarity, (c - lambda * *x / x->norm()).norm());
    } else {
      out.inactive_ratio = std::max(out.inactive_ratio, c.norm() / lambda);
    }
  }
  return out;
}

/// N x (S*O) gain with orthonormal columns (N >= S*O).
inline BlockDesign orthonormal_design(Rng& rng, Index N, Index S, Index O) {
  const Matrix A = rng.normal_matrix(N, S * O);
  Eigen::HouseholderQR<Matrix> qr(A);
  Matrix Q = qr.householderQ() * Matrix::Identity(N, S * O);
  return BlockDesign(std::move(Q), O);
}

}  // namespace bsmx::test
