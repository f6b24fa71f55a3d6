#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace kalman {

/// Runs fn(begin, end) over contiguous chunks of [0, count) on up to
/// `threads` workers. The first exception thrown by any chunk is rethrown.
inline void parallel_for(std::ptrdiff_t count, int threads,
                         const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& fn) {
  const std::ptrdiff_t workers = std::clamp<std::ptrdiff_t>(threads, 1, std::max<std::ptrdiff_t>(count, 1));
  if (workers == 1) {
    fn(0, count);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const std::ptrdiff_t chunk = (count + workers - 1) / workers;
    for (std::ptrdiff_t w = 0; w < workers; ++w) {
      const std::ptrdiff_t begin = w * chunk;
      const std::ptrdiff_t end = std::min(count, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          if (begin < end) fn(begin, end);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Hardware concurrency with a floor of one.
inline int default_thread_count() {
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace kalman
