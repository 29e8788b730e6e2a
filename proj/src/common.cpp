#include "sslkit/common.hpp"

#include <Eigen/Core>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ssl {

namespace {
int g_workers = 1;
}

void set_workers(int n) {
  if (n < 1) n = 1;
  g_workers = n;
  Eigen::setNbThreads(n);
#ifdef _OPENMP
  omp_set_num_threads(n);
#endif
}

int workers() { return g_workers; }

}  // namespace ssl
