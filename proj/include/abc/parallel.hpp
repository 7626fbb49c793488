#pragma once

#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace abc {

// Execution policy for the data-parallel kernels. Serial is the reference
// path; Par fans the index space out over OpenMP threads. Both paths must
// produce bit-identical results: kernels may only write to per-index slots
// and all floating-point reductions happen in a fixed order.
enum class Exec { Serial, Par };

// Thread cap, resolved once per process from ABC_THREADS (falls back to the
// hardware count when unset or invalid).
int max_threads();

template <typename F>
void parallel_for(std::int64_t n, F&& fn, Exec policy = Exec::Par) {
#ifdef _OPENMP
  if (policy == Exec::Par && n > 1 && max_threads() > 1) {
    const int threads = max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
#endif
  (void)policy;
  for (std::int64_t i = 0; i < n; ++i) {
    fn(i);
  }
}

// Pairwise summation: deterministic for a fixed input order and independent
// of the thread count, with O(log n) error growth.
double pairwise_sum(const double* x, std::int64_t n);
double pairwise_sum(const std::vector<double>& x);

}  // namespace abc
