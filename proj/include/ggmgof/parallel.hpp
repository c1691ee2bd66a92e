#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ggm {

inline int default_thread_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs body(k) for k in [0, count) on up to `threads` workers. If any call
/// throws, the exception from the smallest failing k is rethrown, so error
/// reporting does not depend on scheduling.
template <class Body>
void parallel_for(std::ptrdiff_t count, int threads, Body&& body) {
  if (count <= 0) return;
  if (threads <= 0) threads = default_thread_count();
  const auto workers =
      static_cast<std::ptrdiff_t>(std::min<std::ptrdiff_t>(threads, count));
  if (workers <= 1) {
    for (std::ptrdiff_t k = 0; k < count; ++k) body(k);
    return;
  }

  std::atomic<std::ptrdiff_t> next{0};
  std::mutex err_mutex;
  std::ptrdiff_t err_index = count;
  std::exception_ptr err;

  auto run = [&] {
    for (;;) {
      const std::ptrdiff_t k = next.fetch_add(1);
      if (k >= count) return;
      try {
        body(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (k < err_index) {
          err_index = k;
          err = std::current_exception();
        }
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (std::ptrdiff_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace ggm
