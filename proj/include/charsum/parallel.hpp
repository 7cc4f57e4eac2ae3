#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace charsum {

namespace detail {
inline std::atomic<unsigned>& thread_limit_slot() {
  static std::atomic<unsigned> limit{0};
  return limit;
}
}  // namespace detail

// 0 restores the default (hardware concurrency).
inline void set_thread_limit(unsigned n) { detail::thread_limit_slot().store(n); }

inline unsigned worker_count() {
  unsigned n = detail::thread_limit_slot().load();
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

// Splits [begin, end) into fixed-size chunks and evaluates fn(lo, hi) on each.
// Chunk boundaries depend only on the chunk size, so the returned vector (one
// entry per chunk, in order) is identical for every thread count.
template <class R, class Fn>
std::vector<R> parallel_chunks(std::uint64_t begin, std::uint64_t end, std::uint64_t chunk, Fn fn) {
  if (end <= begin) return {};
  if (chunk == 0) chunk = 1;
  const std::uint64_t n_chunks = (end - begin + chunk - 1) / chunk;
  std::vector<R> results(n_chunks);
  const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(worker_count(), n_chunks));
  if (workers <= 1) {
    for (std::uint64_t c = 0; c < n_chunks; ++c) {
      std::uint64_t lo = begin + c * chunk;
      results[c] = fn(lo, std::min(end, lo + chunk));
    }
    return results;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      std::uint64_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      std::uint64_t lo = begin + c * chunk;
      try {
        results[c] = fn(lo, std::min(end, lo + chunk));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n_chunks);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < workers; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace charsum
