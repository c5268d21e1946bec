#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace qdemon {

// Splits [0, n) into at most `threads` contiguous chunks and runs
// fn(worker_index, begin, end) on each, joining before returning. Workers must
// only touch disjoint output slots; the caller merges any per-worker
// accumulators afterwards. The first worker exception (by worker index) is
// rethrown on the calling thread.
template <typename Fn>
void parallel_chunks(long long n, int threads, Fn&& fn) {
  if (n <= 0) return;
  long long workers = std::max(threads, 1);
  workers = std::min<long long>(workers, n);
  if (workers == 1) {
    fn(0, 0ll, n);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const long long base = n / workers;
  const long long extra = n % workers;
  long long begin = 0;
  for (long long w = 0; w < workers; ++w) {
    const long long end = begin + base + (w < extra ? 1 : 0);
    pool.emplace_back([&fn, &errors, w, begin, end] {
      try {
        fn(static_cast<int>(w), begin, end);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
    begin = end;
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace qdemon
