#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace xychain {

/// Runs fn(index) for index in [0, count) on a fixed-size worker pool and
/// returns the results ordered by index. Workers pull indices from a shared
/// counter; because results land in their index slot and reductions happen
/// afterwards in index order, output is identical for any worker count.
template <class T, class Fn>
std::vector<T> run_indexed(int count, int workers, Fn&& fn) {
  std::vector<T> results(count);
  if (count == 0) return results;
  workers = std::max(1, std::min(workers, count));

  if (workers == 1) {
    for (int i = 0; i < count; ++i) results[i] = fn(i);
    return results;
  }

  std::atomic<int> next{0};
  std::atomic<bool> stop{false};
  std::mutex failure_mutex;
  std::exception_ptr failure;

  auto body = [&]() {
    while (!stop.load(std::memory_order_relaxed)) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        results[i] = fn(i);
      } catch (...) {
        {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
        stop.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

/// Worker count from the XYCHAIN_WORKERS environment variable, falling back
/// to the hardware concurrency.
int default_worker_count();

}  // namespace xychain
