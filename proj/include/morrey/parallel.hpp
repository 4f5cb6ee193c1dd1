#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace morrey {

namespace detail {
inline std::atomic<int> g_thread_count{1};
inline thread_local bool t_inside_worker = false;
}  // namespace detail

/// Number of worker threads used by parallel_for. Values < 1 select hardware concurrency.
inline void set_thread_count(int threads) {
  if (threads < 1) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  detail::g_thread_count.store(threads);
}

inline int thread_count() { return detail::g_thread_count.load(); }

/// Calls fn(i) for i in [0, count). Callers write into slot i so results never
/// depend on scheduling. Nested calls run serially on the calling worker.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const int threads = std::min<std::size_t>(thread_count(), count);
  if (threads <= 1 || detail::t_inside_worker) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    detail::t_inside_worker = true;
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
    detail::t_inside_worker = false;
  };
  std::vector<std::jthread> pool;
  pool.reserve(threads - 1);
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace morrey
