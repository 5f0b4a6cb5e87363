#pragma once

#include <exception>

#include <omp.h>

namespace mipreg::experiments {

template <class R, class F>
std::vector<R> map_jobs(int n, int threads, F f) {
  std::vector<std::optional<R>> slot(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> err(static_cast<std::size_t>(n));
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nt)
  for (int j = 0; j < n; ++j) {
    try {
      slot[static_cast<std::size_t>(j)].emplace(f(j));
    } catch (...) {
      err[static_cast<std::size_t>(j)] = std::current_exception();
    }
  }
  std::vector<R> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    if (err[static_cast<std::size_t>(j)]) std::rethrow_exception(err[static_cast<std::size_t>(j)]);
    out.push_back(std::move(*slot[static_cast<std::size_t>(j)]));
  }
  return out;
}

}  // namespace mipreg::experiments
