#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace epec {

/// Resolves a requested worker count: 0 means the EPEC_WORKERS environment
/// variable if set, else hardware concurrency.
unsigned resolve_workers(unsigned requested);

/// Runs fn(i) for every i in [0, n) on up to `workers` threads. Work is
/// handed out dynamically, so fn must not depend on which thread runs it.
/// The first exception thrown by fn is rethrown after all threads join.
template <typename F>
void parallel_for(std::size_t n, unsigned workers, F&& fn) {
  workers = std::min<unsigned>(resolve_workers(workers), static_cast<unsigned>(std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Uniform draw in [0, 1) from the top 53 bits of a 64-bit engine output.
/// Portable across standard libraries, unlike uniform_real_distribution.
inline double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

/// Deterministic child seed for stream `index` of `seed` (splitmix64 mix).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace epec
