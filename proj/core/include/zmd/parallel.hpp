#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace zmd {

/// Thread count: ZMD_THREADS env var, else hardware concurrency.
inline int thread_count() {
  if (const char* env = std::getenv("ZMD_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Runs fn(i) for i in [0, n). Outputs must be disjoint per index; results
/// are then identical regardless of thread count.
inline void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
  int threads = thread_count();
  if (threads <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  size_t chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    size_t lo = static_cast<size_t>(t) * chunk;
    size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] {
      for (size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace zmd
