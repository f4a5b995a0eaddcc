#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace panoseg {

// Resolve a user-facing thread count: 0 means "auto".
inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Run fn(begin, end) over contiguous chunks of [0, n). The chunk boundaries
// depend only on n and the resolved thread count, never on scheduling, so
// callers that merge chunk results deterministically stay deterministic.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned threads, Fn&& fn) {
  const unsigned t = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1));
  if (t <= 1 || n == 0) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + t - 1) / t;
  std::vector<std::thread> workers;
  workers.reserve(t);
  for (unsigned i = 0; i < t; ++i) {
    const std::size_t begin = std::min(n, std::size_t{i} * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& w : workers) w.join();
}

}  // namespace panoseg
