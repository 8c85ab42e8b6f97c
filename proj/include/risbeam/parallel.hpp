#pragma once

#include <cstddef>
#include <exception>

namespace risbeam {

// Environment variable that overrides the OpenMP thread count.
inline constexpr const char* kThreadsEnv = "RISBEAM_NUM_THREADS";

// Applies RISBEAM_NUM_THREADS if set. Returns the thread count in effect.
int configure_threads();
int max_threads();

// Runs body(i) for i in [0, n). Iterations must be independent; results are
// expected to be written to per-index slots and reduced afterwards so the
// outcome does not depend on scheduling. The exception of the lowest failing
// index is rethrown after the loop.
template <class Body>
void parallel_for(std::ptrdiff_t n, Body&& body) {
  std::exception_ptr error;
  std::ptrdiff_t error_index = n;
#ifdef RISBEAM_HAS_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#ifdef RISBEAM_HAS_OPENMP
#pragma omp critical(risbeam_parallel_for_error)
#endif
      {
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace risbeam
