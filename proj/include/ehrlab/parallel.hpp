#pragma once

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace ehrlab {

inline int max_threads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline int thread_id() {
#if defined(_OPENMP)
  return omp_get_thread_num();
#else
  return 0;
#endif
}

inline void set_threads(int n) {
#if defined(_OPENMP)
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

// Reads EHRLAB_THREADS and applies it when set to a positive integer.
void apply_thread_env();

}  // namespace ehrlab
