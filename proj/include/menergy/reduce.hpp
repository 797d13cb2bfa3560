#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <thread>
#include <vector>

namespace menergy {

/// Neumaier-compensated running sum.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  void add(const KahanSum& other) {
    add(other.sum);
    add(other.comp);
  }
  double value() const { return sum + comp; }
};

/// Rows per reduction chunk. Fixed so that the summation tree does not depend
/// on how many workers process the chunks.
inline constexpr std::size_t kReduceChunkRows = 32;

/// Number of worker threads to use when the caller asks for `requested`
/// (0 means hardware concurrency).
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Runs `body(row, acc)` for every row in [0, rows), accumulating into one
/// `Acc` per fixed-size chunk, then merges chunk results left to right with
/// `merge(into, from)`. The result is bitwise independent of `threads`.
template <class Acc, class Body, class Merge>
Acc chunked_reduce(std::size_t rows, unsigned threads, Body&& body, Merge&& merge) {
  const std::size_t n_chunks = (rows + kReduceChunkRows - 1) / kReduceChunkRows;
  std::vector<Acc> partial(n_chunks);
  auto run_chunk = [&](std::size_t c) {
    const std::size_t lo = c * kReduceChunkRows;
    const std::size_t hi = std::min(rows, lo + kReduceChunkRows);
    for (std::size_t r = lo; r < hi; ++r) body(r, partial[c]);
  };
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n_chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1))
          run_chunk(c);
      });
    }
    for (auto& t : pool) t.join();
  }
  Acc total{};
  for (const auto& p : partial) merge(total, p);
  return total;
}

}  // namespace menergy
