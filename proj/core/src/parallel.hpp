#pragma once

#include <omp.h>

namespace hlift::detail {

inline int thread_count(int requested) {
  return requested > 0 ? requested : omp_get_max_threads();
}

}  // namespace hlift::detail
