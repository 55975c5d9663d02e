#include "omniloc/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace omniloc {

namespace {

std::atomic<int> g_max_threads{1};
thread_local bool t_inside_parallel = false;

}  // namespace

int max_threads() { return g_max_threads.load(std::memory_order_relaxed); }

void set_max_threads(int n) {
  g_max_threads.store(n < 1 ? 1 : n, std::memory_order_relaxed);
}

void parallel_blocks(std::int64_t n_blocks, const std::function<void(std::int64_t)>& fn) {
  if (n_blocks <= 0) return;
  const int threads = max_threads();
  if (threads <= 1 || n_blocks == 1 || t_inside_parallel) {
    for (std::int64_t b = 0; b < n_blocks; ++b) fn(b);
    return;
  }

  const int workers = static_cast<int>(std::min<std::int64_t>(threads, n_blocks));
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto body = [&]() {
    t_inside_parallel = true;
    for (;;) {
      const std::int64_t b = next.fetch_add(1, std::memory_order_relaxed);
      if (b >= n_blocks) break;
      try {
        fn(b);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
    t_inside_parallel = false;
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();

  if (error) std::rethrow_exception(error);
}

}  // namespace omniloc
