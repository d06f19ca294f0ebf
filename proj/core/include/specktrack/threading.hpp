#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace specktrack {

/// 0 means "use hardware concurrency".
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Runs fn(begin, end) over a fixed contiguous partition of [0, n) into
/// `threads` chunks. Work items must write to disjoint slots; there is no
/// cross-thread reduction, so results are identical for every thread count.
/// The first exception thrown by any chunk is rethrown after the join.
inline void parallel_for(int64_t n, int threads,
                         const std::function<void(int64_t, int64_t)>& fn) {
  if (n <= 0) return;
  threads = resolve_threads(threads);
  if (threads > n) threads = static_cast<int>(n);
  if (threads <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  const int64_t chunk = (n + threads - 1) / threads;
  std::vector<std::exception_ptr> errors(threads, nullptr);
  for (int t = 1; t < threads; ++t) {
    const int64_t b = t * chunk;
    const int64_t e = std::min<int64_t>(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, &errors, t, b, e] {
      try {
        fn(b, e);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  try {
    fn(0, std::min<int64_t>(n, chunk));
  } catch (...) {
    errors[0] = std::current_exception();
  }
  for (auto& th : pool) th.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

/// Convenience wrapper for per-index work.
inline void parallel_for_each(int64_t n, int threads,
                              const std::function<void(int64_t)>& fn) {
  parallel_for(n, threads, [&fn](int64_t b, int64_t e) {
    for (int64_t i = b; i < e; ++i) fn(i);
  });
}

}  // namespace specktrack
