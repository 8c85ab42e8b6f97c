#include "risbeam/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef RISBEAM_HAS_OPENMP
#include <omp.h>
#endif

namespace risbeam {

int configure_threads() {
#ifdef RISBEAM_HAS_OPENMP
  if (const char* env = std::getenv(kThreadsEnv)) {
    try {
      int n = std::stoi(env);
      if (n > 0) omp_set_num_threads(n);
    } catch (const std::exception&) {
      // ignore malformed values, keep the OpenMP default
    }
  }
  return omp_get_max_threads();
#else
  return 1;
#endif
}

int max_threads() {
#ifdef RISBEAM_HAS_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace risbeam
