#pragma once

// Data-parallel scans over all gain blocks.
//
// `serial` is the reference implementation used by the tests. `parallel`
// splits the blocks into fixed-size chunks handled by OpenMP threads; the
// chunking does not depend on the thread count, so results are bitwise
// reproducible for any number of threads. The unqualified functions
// dispatch to `parallel` when the library was built with OpenMP.

#include "bsmx/core.hpp"

namespace bsmx::kernels {

/// Number of blocks handled by one parallel task.
inline constexpr Index kChunkBlocks = 64;

namespace serial {

/// out[s] = ||G_s^T R||_Fro for every location s.
Vector block_correlation_norms(const BlockDesign& G, const Matrix& R);

/// out[s] = sigma_max(G_s)^2, zero for an all-zero block.
Vector block_lipschitz_all(const BlockDesign& G);

}  // namespace serial

namespace parallel {

Vector block_correlation_norms(const BlockDesign& G, const Matrix& R);
Vector block_lipschitz_all(const BlockDesign& G);

}  // namespace parallel

Vector block_correlation_norms(const BlockDesign& G, const Matrix& R);
Vector block_lipschitz_all(const BlockDesign& G);

/// Threads available to the parallel kernels (1 without OpenMP).
int max_threads();
void set_num_threads(int n);
bool built_with_openmp();

}  // namespace bsmx::kernels
