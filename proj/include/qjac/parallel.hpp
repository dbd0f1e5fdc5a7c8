#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qjac {

/// Number of worker threads used by parallel scans; 0 means hardware concurrency.
inline unsigned& parallel_threads() {
  static unsigned n = 0;
  return n;
}

/// out[i] = fn(i) for i in [0, count). Each slot is written by exactly one
/// worker, so the result does not depend on scheduling. The first exception
/// thrown by any worker is rethrown on the calling thread.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t count, Fn&& fn) {
  std::vector<T> out(count);
  unsigned workers = parallel_threads() ? parallel_threads() : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>((count + 15) / 16)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) out[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace qjac
