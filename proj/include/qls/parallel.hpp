#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace qls {

// Worker-count policy: explicit value, else QLS_THREADS, else hardware.
int default_threads();
void set_default_threads(int n);

// Static contiguous partition of [0, n) over `threads` workers. Each index
// is visited exactly once; callers write disjoint outputs, so results do
// not depend on the worker count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  auto chunk = [&](std::size_t w) {
    const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
    for (std::size_t i = lo; i < hi; ++i) fn(i);
  };
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(chunk, w);
  chunk(0);
}

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  parallel_for(n, default_threads(), std::forward<Fn>(fn));
}

}  // namespace qls
