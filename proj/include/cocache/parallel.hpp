#pragma once

#ifdef _OPENMP
#include <omp.h>
#define COCACHE_OMP_PRAGMA(content) _Pragma(content)
#else
#define COCACHE_OMP_PRAGMA(content)
#endif

namespace cocache {

// Selects between the OpenMP kernels and the serial reference loops. Both
// paths perform the same per-element arithmetic in the same order, so their
// results are bit-identical.
enum class Execution { serial, parallel };

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace cocache
