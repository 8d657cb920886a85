#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace ssate {

// Worker count: SSATE_THREADS caps it, default all hardware threads.
inline int worker_count() {
  if (const char* env = std::getenv("SSATE_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

namespace detail {
inline thread_local int parallel_depth = 0;
}

// Runs fn(i) for i in [0, n).  Work is split by index so results only depend
// on i, never on scheduling; nested calls run serially to avoid
// oversubscription.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  int workers = worker_count();
  if (n == 0) return;
  if (workers <= 1 || detail::parallel_depth > 0 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto run = [&]() {
    ++detail::parallel_depth;
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      fn(i);
    }
    --detail::parallel_depth;
  };
  std::vector<std::thread> pool;
  int nthreads = static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(workers)));
  pool.reserve(nthreads);
  for (int tid = 0; tid < nthreads; ++tid) pool.emplace_back(run);
  for (auto& th : pool) th.join();
}

}  // namespace ssate
