#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace soz {

/// Worker cap: `SOZ_THREADS` if set and positive, otherwise the hardware
/// concurrency. `set_thread_count` overrides both (0 restores the default).
std::size_t thread_count();
void set_thread_count(std::size_t n);

namespace detail {
bool in_parallel_region() noexcept;
void run_parallel(std::size_t n, const std::function<void(std::size_t)>& body);
}  // namespace detail

/// Calls `body(i)` for every i in [0, n). Iterations must be independent;
/// results are written by index so the outcome never depends on the number
/// of workers. Nested calls run serially on the calling worker.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  if (n == 0) return;
  if (n == 1 || thread_count() <= 1 || detail::in_parallel_region()) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  detail::run_parallel(n, std::function<void(std::size_t)>(std::forward<Body>(body)));
}

}  // namespace soz
