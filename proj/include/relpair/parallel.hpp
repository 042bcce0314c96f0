// Deterministic parallel map: results are stored by index, so the output does
// not depend on the thread count or scheduling.

#ifndef RELPAIR_PARALLEL_HPP_
#define RELPAIR_PARALLEL_HPP_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace relpair {

  template <typename F>
  auto parallel_map(std::size_t n, std::size_t threads, F&& f)
      -> std::vector<decltype(f(std::size_t{}))> {
    using R = decltype(f(std::size_t{}));
    std::vector<R> out(n);
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1) {
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = f(i);
      }
      return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr       error;
    std::mutex               error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&]() {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= n) {
            return;
          }
          try {
            out[i] = f(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) {
              error = std::current_exception();
            }
          }
        }
      });
    }
    for (auto& th : pool) {
      th.join();
    }
    if (error) {
      std::rethrow_exception(error);
    }
    return out;
  }

}  // namespace relpair

#endif  // RELPAIR_PARALLEL_HPP_
