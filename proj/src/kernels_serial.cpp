#include "bsmx/kernels.hpp"
#include "bsmx/prox.hpp"

namespace bsmx::kernels::serial {

Vector block_correlation_norms(const BlockDesign& G, const Matrix& R) {
  if (R.rows() != G.n_sensors()) throw DimensionError("correlation: row count mismatch");
  Vector out(G.n_locations());
  for (Index s = 0; s < G.n_locations(); ++s) {
    out[s] = (G.block(s).transpose() * R).norm();
  }
  return out;
}

Vector block_lipschitz_all(const BlockDesign& G) {
  Vector out(G.n_locations());
  for (Index s = 0; s < G.n_locations(); ++s) out[s] = gram_spectral_norm(G.block(s));
  return out;
}

}  // namespace bsmx::kernels::serial
