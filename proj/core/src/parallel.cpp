#include "soz/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <string>

namespace soz {
namespace {

std::atomic<std::size_t> g_override{0};
thread_local bool t_in_region = false;

std::size_t env_threads() {
  const char* env = std::getenv("SOZ_THREADS");
  if (env == nullptr) return 0;
  try {
    const long v = std::stol(env);
    return v > 0 ? static_cast<std::size_t>(v) : 0;
  } catch (...) {
    return 0;
  }
}

}  // namespace

std::size_t thread_count() {
  if (const std::size_t o = g_override.load(); o > 0) return o;
  if (const std::size_t e = env_threads(); e > 0) return e;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void set_thread_count(std::size_t n) { g_override.store(n); }

namespace detail {

bool in_parallel_region() noexcept { return t_in_region; }

void run_parallel(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(n, thread_count());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::size_t err_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr err;

  auto work = [&] {
    t_in_region = true;
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        // Keep the failure with the lowest index so the reported error does
        // not depend on scheduling.
        std::lock_guard lock(err_mu);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
      }
    }
    t_in_region = false;
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace detail
}  // namespace soz
