#pragma once

#include <cstddef>
#include <exception>

namespace orbi::detail {

/// OpenMP loop over [0, count); the first exception thrown by a body is
/// rethrown after the loop.
template <class F>
void parallel_for(std::size_t count, F&& body) {
  std::exception_ptr failure;
  const auto n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(orbi_parallel_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace orbi::detail
