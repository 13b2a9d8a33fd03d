#include "bsmx/kernels.hpp"
#include "bsmx/prox.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bsmx::kernels {

namespace {

// Below this many multiply-adds the thread start-up costs more than it saves.
constexpr double kParallelWork = 2e5;

Index n_chunks(Index n_blocks) { return (n_blocks + kChunkBlocks - 1) / kChunkBlocks; }

// Nested use (e.g. inside a parallel resampling loop) stays single-threaded.
bool worth_parallel(double work) {
#ifdef _OPENMP
  if (omp_in_parallel()) return false;
#endif
  return work > kParallelWork;
}

}  // namespace

namespace parallel {

Vector block_correlation_norms(const BlockDesign& G, const Matrix& R) {
  if (R.rows() != G.n_sensors()) throw DimensionError("correlation: row count mismatch");
  const Index S = G.n_locations();
  const Index O = G.n_orient();
  const Index chunks = n_chunks(S);
  const double work = static_cast<double>(G.entries().size()) * static_cast<double>(R.cols());
  Vector out(S);

#pragma omp parallel for schedule(static) if (worth_parallel(work))
  for (Index c = 0; c < chunks; ++c) {
    const Index first = c * kChunkBlocks;
    const Index count = std::min(kChunkBlocks, S - first);
    const Matrix corr = G.entries().middleCols(first * O, count * O).transpose() * R;
    for (Index k = 0; k < count; ++k) out[first + k] = corr.middleRows(k * O, O).norm();
  }
  return out;
}

Vector block_lipschitz_all(const BlockDesign& G) {
  const Index S = G.n_locations();
  const double work = static_cast<double>(G.entries().size()) * static_cast<double>(G.n_orient());
  Vector out(S);
#pragma omp parallel for schedule(static) if (worth_parallel(work))
  for (Index s = 0; s < S; ++s) out[s] = gram_spectral_norm(G.block(s));
  return out;
}

}  // namespace parallel

Vector block_correlation_norms(const BlockDesign& G, const Matrix& R) {
#ifdef _OPENMP
  return parallel::block_correlation_norms(G, R);
#else
  return serial::block_correlation_norms(G, R);
#endif
}

Vector block_lipschitz_all(const BlockDesign& G) {
#ifdef _OPENMP
  return parallel::block_lipschitz_all(G);
#else
  return serial::block_lipschitz_all(G);
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_num_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

bool built_with_openmp() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

}  // namespace bsmx::kernels
