#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace apml {

// Global worker count, 0 = hardware concurrency. Set once from the CLI.
int worker_count();
void set_worker_count(int n);

// Static chunked parallel map: fn(begin, end, chunk_index) over [0, n).
// Chunk boundaries depend only on n and the worker count, so reductions
// that merge chunks in index order stay deterministic.
inline void parallel_chunks(size_t n,
                            const std::function<void(size_t, size_t, size_t)>& fn) {
  size_t workers = static_cast<size_t>(worker_count());
  if (workers <= 1 || n < 2) {
    fn(0, n, 0);
    return;
  }
  if (workers > n) workers = n;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const size_t chunk = (n + workers - 1) / workers;
  for (size_t w = 0; w < workers; ++w) {
    const size_t begin = w * chunk;
    const size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&fn, begin, end, w] { fn(begin, end, w); });
  }
  for (auto& t : threads) t.join();
}

}  // namespace apml
