#pragma once

#include <atomic>
#include <thread>
#include <vector>

namespace rimlab {

// Run fn(b) for b = 0 .. n_batches-1 on up to `threads` workers.  Batch
// indices are handed out through an atomic counter; callers that need
// deterministic results must make each batch self-contained and merge batch
// outputs in index order afterwards.
template <class Fn>
void run_batches(int n_batches, int threads, Fn&& fn) {
  if (threads <= 1 || n_batches <= 1) {
    for (int b = 0; b < n_batches; ++b) fn(b);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int b = next.fetch_add(1);
      if (b >= n_batches) return;
      fn(b);
    }
  };
  const int n_workers = threads < n_batches ? threads : n_batches;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace rimlab
