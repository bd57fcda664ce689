#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace caldet {

inline int worker_count() {
  if (const char* env = std::getenv("CALDET_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Ordered parallel map: f(i) runs on a worker, results land in slot i, so the
// output is deterministic regardless of the thread count.
template <typename F>
void parallel_for(int n, F&& f, int threads = 0) {
  if (threads <= 0) threads = worker_count();
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (int i = t; i < n; i += threads) f(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace caldet
