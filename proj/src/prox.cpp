#include "bsmx/prox.hpp"

#include <cmath>

#include "bsmx/kernels.hpp"

namespace bsmx {

double gram_spectral_norm(const Eigen::Ref<const Matrix>& block) {
  if ((block.array() == 0.0).all()) return 0.0;
  const Matrix gram = block.transpose() * block;
  if (gram.rows() == 1) return gram(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

double block_lipschitz(const Eigen::Ref<const Matrix>& block) {
  const double L = gram_spectral_norm(block);
  if (!(L > 0.0)) throw DegenerateBlockError("degenerate design block");
  return L;
}

BlockStepSizes BlockStepSizes::compute(const BlockDesign& G) {
  BlockStepSizes out;
  const Vector L = kernels::block_lipschitz_all(G);
  out.mu = Vector::Zero(L.size());
  for (Index s = 0; s < L.size(); ++s) {
    if (L[s] > 0.0) {
      out.mu[s] = 1.0 / L[s];
    } else {
      out.degenerate.push_back(s);
    }
  }
  return out;
}

Matrix group_soft_threshold(const Eigen::Ref<const Matrix>& x, double threshold) {
  if (!(threshold > 0.0)) throw InvalidArgument("group_soft_threshold: threshold must be > 0");
  const double norm = x.norm();
  if (norm <= threshold) return Matrix::Zero(x.rows(), x.cols());
  return x * (1.0 - threshold / norm);
}

}  // namespace bsmx
