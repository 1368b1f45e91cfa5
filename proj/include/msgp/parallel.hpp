#pragma once

#include <cstdint>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace msgp::par {

/// Process-wide switch for the OpenMP code paths. Tests flip this off to
/// compare parallel output against the serial path; results must be
/// bit-identical because parallel loops only range over independent output
/// elements.
bool enabled();
void set_enabled(bool on);

int max_threads();

/// Runs f(i) for i in [0, n), in parallel when OpenMP is available and the
/// switch is on. The first exception thrown by any iteration is rethrown on
/// the calling thread.
template <class F>
void for_each_index(std::int64_t n, F&& f) {
#ifdef _OPENMP
  if (enabled() && n > 1) {
    std::exception_ptr err;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        f(i);
      } catch (...) {
#pragma omp critical(msgp_par_err)
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
    return;
  }
#endif
  for (std::int64_t i = 0; i < n; ++i) f(i);
}

}  // namespace msgp::par
