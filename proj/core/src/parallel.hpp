#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rlr::detail {

inline thread_local bool insideParallelRegion = false;

/// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads. Each
/// index is processed exactly once; the first exception is rethrown.
/// Nested calls run sequentially on the calling worker.
template <class Fn>
void parallelFor(std::size_t n, Fn&& fn, std::size_t maxThreads = 0) {
  std::size_t threads = maxThreads ? maxThreads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1 || insideParallelRegion) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex errorMutex;
  auto worker = [&] {
    const bool outer = insideParallelRegion;
    insideParallelRegion = true;
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(errorMutex);
        if (!error) error = std::current_exception();
      }
    }
    insideParallelRegion = outer;
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace rlr::detail
