#pragma once

#include <cstdint>
#include <functional>

namespace rstk::par {

/// Process-wide worker count. n <= 0 selects an automatic value.
void set_threads(int n);
int threads();

/// Runs fn(begin, end) over fixed-size chunks of [0, count). Chunk
/// boundaries depend only on count, so kernels that write disjoint
/// per-index data produce identical results for any worker count.
void for_chunks(std::int64_t count,
                const std::function<void(std::int64_t, std::int64_t)>& fn);

/// Chunked reduction. Partial sums are combined in chunk order, so the
/// result is independent of the worker count.
double sum_chunks(std::int64_t count,
                  const std::function<double(std::int64_t, std::int64_t)>& fn);

}  // namespace rstk::par
