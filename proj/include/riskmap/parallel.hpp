#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace riskmap {

/// Half-open [begin, end) ranges covering [0, n) in `parts` near-equal pieces.
inline std::vector<std::pair<std::size_t, std::size_t>> split_evenly(
    std::size_t n, std::size_t parts) {
  parts = std::max<std::size_t>(1, parts);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(parts);
  for (std::size_t p = 0; p < parts; ++p)
    out.emplace_back(n * p / parts, n * (p + 1) / parts);
  return out;
}

/// Runs task(i) for i in [0, tasks) on up to `threads` workers. The first
/// exception thrown by any task is rethrown after all workers join.
template <class Fn>
void parallel_for(std::size_t tasks, std::size_t threads, Fn&& task) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, tasks));
  if (threads == 1) {
    for (std::size_t i = 0; i < tasks; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks;) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace riskmap
