#ifndef INVARTEST_PARALLEL_HPP
#define INVARTEST_PARALLEL_HPP

#include <algorithm>
#include <thread>
#include <vector>

namespace invartest {

// Runs fn(i) for i in [0, total) across `threads` workers on contiguous
// chunks.  Callers key all randomness and output slots to the index i, so
// results never depend on scheduling or worker count.
template <typename Fn>
void parallel_for(long total, int threads, Fn&& fn) {
  if (threads <= 1 || total < 2) {
    for (long i = 0; i < total; ++i) fn(i);
    return;
  }
  const int workers =
      static_cast<int>(std::min<long>(threads, std::max<long>(1, total)));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const long chunk = (total + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const long begin = static_cast<long>(w) * chunk;
    const long end = std::min(total, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] {
      for (long i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace invartest

#endif  // INVARTEST_PARALLEL_HPP
