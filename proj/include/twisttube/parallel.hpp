#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace twisttube {

// Runs fn(i) for i in [0, n) on up to `workers` threads. Each index is
// processed exactly once; callers store results by index, so the outcome does
// not depend on scheduling. The exception of the lowest failing index is
// rethrown after all threads have joined.
template <class Fn>
void parallel_for(int n, int workers, Fn&& fn) {
  if (n <= 0) return;
  workers = std::clamp(workers, 1, n);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto run = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Worker count: TWISTTUBE_WORKERS when set to a positive integer, otherwise
// the configured value (at least 1).
inline int resolve_workers(int configured) {
  if (const char* env = std::getenv("TWISTTUBE_WORKERS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  return std::max(configured, 1);
}

}  // namespace twisttube
