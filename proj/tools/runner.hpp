// Thread-count resolution and a deterministic task-parallel loop.
//
// Tasks are indexed 0..n-1 and each writes only to its own output slot, so
// results are identical regardless of how many worker threads execute them.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "toml_lite.hpp"

namespace smcf::cli {

// Precedence: --threads flag, then SMC_FORGET_THREADS, then the config file,
// then hardware concurrency.
inline int resolve_threads(std::optional<int> flag, std::optional<int> config) {
  auto positive = [](long long v, const char* origin) {
    if (v < 1)
      throw ConfigError(std::string(origin) + " thread count must be >= 1");
    return static_cast<int>(v);
  };
  if (flag) return positive(*flag, "--threads");
  if (const char* env = std::getenv("SMC_FORGET_THREADS")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end == env || *end != '\0')
      throw ConfigError("SMC_FORGET_THREADS is not an integer");
    return positive(v, "SMC_FORGET_THREADS");
  }
  if (config) return positive(*config, "config");
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs body(i) for i in [0, count) on up to `threads` workers.  The first
// exception thrown by any task is rethrown on the calling thread.
inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace smcf::cli
