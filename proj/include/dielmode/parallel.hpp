#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace dielmode {

// Global worker count for the chunked loops below. Set once from the CLI.
inline int& thread_count() {
  static int n = 1;
  return n;
}

// Runs fn(chunk_begin, chunk_end) over [0, n) split into fixed-size chunks.
// The chunk grid depends only on n, never on the worker count, so per-chunk
// partial results combined in chunk order give bit-identical output for any
// --threads value.
template <typename Fn>
void parallel_chunks(std::size_t n, std::size_t chunk, Fn&& fn) {
  if (n == 0) return;
  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t nchunks = (n + chunk - 1) / chunk;
  const int workers = std::max(1, thread_count());
  if (workers == 1 || nchunks == 1) {
    for (std::size_t c = 0; c < nchunks; ++c)
      fn(c, c * chunk, std::min(n, (c + 1) * chunk));
    return;
  }
  std::atomic<std::size_t> next{0};
  auto body = [&]() {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= nchunks) break;
      fn(c, c * chunk, std::min(n, (c + 1) * chunk));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
}

}  // namespace dielmode
