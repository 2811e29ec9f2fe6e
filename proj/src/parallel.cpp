#include "evt/parallel.hpp"

#ifdef EVT_HAVE_OPENMP
#include <omp.h>
#endif

namespace evt::par {

namespace {
int g_max_threads = -1;  // -1: not set, use runtime default
}

void set_max_threads(int n) { g_max_threads = n < 1 ? 1 : n; }

int max_threads() {
#ifdef EVT_HAVE_OPENMP
  if (g_max_threads < 0) return omp_get_max_threads();
  return g_max_threads;
#else
  return 1;
#endif
}

bool enabled() { return max_threads() > 1; }

}  // namespace evt::par
