#pragma once

// Chunked parallel reduction with a deterministic merge.
//
// The index range is split into a fixed number of chunks that does not depend
// on the worker count. Each chunk reduces into its own partial and partials
// are merged in chunk order, so results are bitwise identical for any thread
// count.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace lor {

/// Worker count used by the estimators (default: hardware concurrency).
int thread_count() noexcept;
void set_thread_count(int n) noexcept;

inline constexpr std::size_t kReductionChunks = 16;

/// body(begin, end, partial) is called once per chunk; merge(into, from) folds
/// partials left to right. `init` is copied into every partial.
template <class Partial, class Body, class Merge>
Partial parallel_reduce(std::size_t n, const Partial& init, Body body, Merge merge) {
  const std::size_t chunks = std::max<std::size_t>(1, std::min(kReductionChunks, n));
  std::vector<Partial> partials(chunks, init);
  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = n * c / chunks;
    const std::size_t end = n * (c + 1) / chunks;
    body(begin, end, partials[c]);
  };
  const auto workers =
      static_cast<std::size_t>(std::clamp(thread_count(), 1, static_cast<int>(chunks)));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < chunks; c = next++) run_chunk(c);
      });
    }
  }
  Partial out = std::move(partials[0]);
  for (std::size_t c = 1; c < chunks; ++c) merge(out, partials[c]);
  return out;
}

/// Parallel loop over independent items; body(i) must not share mutable state.
template <class Body>
void parallel_for(std::size_t n, Body body) {
  const auto workers = static_cast<std::size_t>(std::max(1, thread_count()));
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
}

}  // namespace lor
