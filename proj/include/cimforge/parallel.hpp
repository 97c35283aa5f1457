#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cimforge {

// Serial keeps the reference implementation path; Parallel runs the same
// loop body under OpenMP. Results are bit-identical by construction because
// all randomness is drawn from counter-based sub-streams keyed by loop index.
enum class ExecPolicy { Serial, Parallel };

inline int worker_count(ExecPolicy policy) {
#ifdef _OPENMP
  return policy == ExecPolicy::Parallel ? omp_get_max_threads() : 1;
#else
  (void)policy;
  return 1;
#endif
}

template <typename Body>
void for_each_index(std::int64_t n, ExecPolicy policy, Body&& body) {
  if (policy == ExecPolicy::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
      body(i);
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) {
      body(i);
    }
  }
}

}  // namespace cimforge
