#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace fairmatch {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static-stride parallel loop. Work item i must write only to its own slot;
// results are then independent of scheduling.
template <class Fn>
void parallel_for(size_t n, int n_threads, Fn&& fn) {
  int workers = resolve_threads(n_threads);
  if (workers <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  if (static_cast<size_t>(workers) > n) workers = static_cast<int>(n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (size_t i = static_cast<size_t>(w); i < n; i += static_cast<size_t>(workers)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace fairmatch
