#include "rstk/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace rstk::par {

namespace {

std::atomic<int> g_threads{0};

// Rows per chunk. Fixed so that chunk boundaries (and therefore reduction
// order) never depend on the worker count.
constexpr std::int64_t kChunk = 64;

int resolve_threads() {
  int n = g_threads.load(std::memory_order_relaxed);
  if (n > 0) return n;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

void run_chunks(std::int64_t n_chunks,
                const std::function<void(std::int64_t)>& chunk_fn) {
  const int workers =
      static_cast<int>(std::min<std::int64_t>(resolve_threads(), n_chunks));
  if (workers <= 1) {
    for (std::int64_t ci = 0; ci < n_chunks; ++ci) chunk_fn(ci);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::int64_t ci = next.fetch_add(1, std::memory_order_relaxed);
        if (ci >= n_chunks) break;
        chunk_fn(ci);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

void set_threads(int n) { g_threads.store(n < 0 ? 0 : n); }

int threads() { return resolve_threads(); }

void for_chunks(std::int64_t count,
                const std::function<void(std::int64_t, std::int64_t)>& fn) {
  if (count <= 0) return;
  const std::int64_t n_chunks = (count + kChunk - 1) / kChunk;
  run_chunks(n_chunks, [&](std::int64_t ci) {
    fn(ci * kChunk, std::min(count, (ci + 1) * kChunk));
  });
}

double sum_chunks(std::int64_t count,
                  const std::function<double(std::int64_t, std::int64_t)>& fn) {
  if (count <= 0) return 0.0;
  const std::int64_t n_chunks = (count + kChunk - 1) / kChunk;
  std::vector<double> partial(static_cast<std::size_t>(n_chunks), 0.0);
  run_chunks(n_chunks, [&](std::int64_t ci) {
    partial[static_cast<std::size_t>(ci)] =
        fn(ci * kChunk, std::min(count, (ci + 1) * kChunk));
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace rstk::par
