#pragma once
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dnk {

// Runs body(i) for i in [0, n). With threads <= 1 this is a plain loop.
// Callers must make iterations independent (per-index derived seeds, disjoint
// output slots), so results never depend on the thread count.
inline void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for num_threads(threads) schedule(static)
  for (int i = 0; i < n; ++i) body(i);
#else
  for (int i = 0; i < n; ++i) body(i);
#endif
}

inline int hw_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace dnk
