// Index-space parallel loop. Tasks must be independent; results must depend
// only on the index (all randomness keyed by index), so any worker count
// produces identical values.
#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace rfim {

inline void parallel_for(int begin, int end, int workers,
                         const std::function<void(int)>& fn) {
  if (end <= begin) return;
  if (workers <= 1 || end - begin == 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::atomic<int> next{begin};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= end) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const int count = std::min(workers, end - begin);
  pool.reserve(count);
  for (int w = 0; w < count; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace rfim
