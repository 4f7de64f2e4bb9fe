#pragma once

#include <omp.h>

namespace obstacle {

/// Runs fn(k) for k in [0, n). With threads <= 1 this is the plain serial
/// loop; otherwise an OpenMP static schedule. Callers write per-element
/// results into disjoint slots and reduce serially in element order, which
/// keeps both paths bit-identical.
template <class Fn>
void for_each_element(int n, int threads, Fn&& fn) {
  if (threads <= 1) {
    for (int k = 0; k < n; ++k) fn(k);
    return;
  }
#pragma omp parallel for num_threads(threads) schedule(static)
  for (int k = 0; k < n; ++k) fn(k);
}

/// Thread cap from OBSTACLE_FEM_THREADS (default 1).
int default_thread_count();

}  // namespace obstacle
