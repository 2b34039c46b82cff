#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace vista {

/// Runs fn(0..count-1) on up to `jobs` worker threads. Tasks pull indices from
/// a shared counter; fn must write only to its own slot and must not throw.
inline void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  const int workers = std::min(jobs, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace vista
