#pragma once

// OpenMP shims so the serial build (no -fopenmp) still compiles.
#ifdef _OPENMP
#include <omp.h>
#else
inline int omp_get_max_threads() { return 1; }
inline int omp_get_thread_num() { return 0; }
inline int omp_get_num_threads() { return 1; }
#endif

namespace hetedge {

/// Resolves a user thread count: <= 0 means "all available".
inline int resolve_threads(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

}  // namespace hetedge
