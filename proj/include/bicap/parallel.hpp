#pragma once

// Instance-level parallelism.  Work items are independent and write only to
// their own index, so results do not depend on the thread count.  The
// BICAP_THREADS environment variable caps the pool.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bicap {

inline int worker_count() {
  if (const char* e = std::getenv("BICAP_THREADS")) {
    int v = std::atoi(e);
    if (v >= 1) return v;
  }
  unsigned h = std::thread::hardware_concurrency();
  return h ? int(h) : 1;
}

template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::size_t w = std::min<std::size_t>(std::size_t(worker_count()), n ? n : 1);
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < w; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace bicap
