#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace occ {

/// Worker count used by the exact and Monte Carlo engines (default: hardware concurrency).
void set_num_threads(unsigned threads);
unsigned num_threads();

/// Number of contiguous blocks `parallel_blocks` splits `count` items into.
inline std::size_t block_count(std::size_t count) {
  return std::max<std::size_t>(1, std::min<std::size_t>(num_threads(), count));
}

/**
 * Runs body(block, begin, end) over a static partition of [0, count).
 *
 * The partition depends only on `count` and the thread setting; callers that
 * need results independent of the thread count must make each item's work
 * self-contained and reduce per-block results in an order-free way.
 */
template <class Body>
void parallel_blocks(std::size_t count, Body&& body) {
  if (count == 0) return;
  const std::size_t blocks = block_count(count);
  auto range = [&](std::size_t b) {
    return std::pair{count * b / blocks, count * (b + 1) / blocks};
  };
  if (blocks == 1) {
    body(std::size_t{0}, std::size_t{0}, count);
    return;
  }
  std::vector<std::exception_ptr> errors(blocks);
  std::vector<std::thread> workers;
  workers.reserve(blocks - 1);
  for (std::size_t b = 1; b < blocks; ++b) {
    workers.emplace_back([&, b] {
      try {
        auto [lo, hi] = range(b);
        body(b, lo, hi);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    });
  }
  try {
    auto [lo, hi] = range(0);
    body(std::size_t{0}, lo, hi);
  } catch (...) {
    errors[0] = std::current_exception();
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Item-wise parallel loop; body(i) must only write state owned by item i.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  parallel_blocks(count, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) body(i);
  });
}

}  // namespace occ
