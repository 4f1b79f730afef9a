#pragma once

#include <cstdint>
#include <cstdlib>
#include <span>
#include <thread>
#include <vector>

namespace ymhk {

namespace detail {
inline int read_thread_env() {
  const char* e = std::getenv("YMHK_THREADS");
  if (!e) return 1;
  int v = std::atoi(e);
  return v >= 1 ? v : 1;
}
inline int& thread_count_ref() {
  static int count = read_thread_env();
  return count;
}
}  // namespace detail

/// Worker thread count. Defaults to the YMHK_THREADS environment variable
/// (1 if unset). Results never depend on it: parallel loops only perform
/// disjoint per-index writes and all reductions are single-threaded trees.
inline int thread_count() { return detail::thread_count_ref(); }
inline void set_thread_count(int n) {
  detail::thread_count_ref() = n >= 1 ? n : 1;
}

/// Apply f(i) for i in [0, n). f must write only to slots owned by i.
template <class F>
void parallel_for(std::int64_t n, F&& f) {
  const int threads = thread_count();
  if (threads <= 1 || n < 4096) {
    for (std::int64_t i = 0; i < n; ++i) f(i);
    return;
  }
  const std::int64_t chunk = (n + threads - 1) / threads;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    const std::int64_t lo = t * chunk;
    const std::int64_t hi = lo + chunk < n ? lo + chunk : n;
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &f] {
      for (std::int64_t i = lo; i < hi; ++i) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

/// Fixed-shape pairwise summation. The reduction tree depends only on the
/// length, so the result is bitwise reproducible for any thread count.
inline double pairwise_sum(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

}  // namespace ymhk
