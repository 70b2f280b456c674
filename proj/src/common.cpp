#include "recbench/common.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace recbench {

std::string hexHash(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

namespace {
std::atomic<unsigned> g_workers{0};
}

unsigned workerCount() {
  unsigned n = g_workers.load(std::memory_order_relaxed);
  if (n == 0) {
    n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
  }
  return n;
}

void setWorkerCount(unsigned n) { g_workers.store(n == 0 ? 1 : n); }

namespace {
thread_local bool g_inside_parallel_for = false;
}

void parallelFor(Index begin, Index end, const std::function<void(Index)>& fn) {
  const Index total = end - begin;
  if (total <= 0) return;
  const unsigned workers =
      std::min<unsigned>(workerCount(), static_cast<unsigned>(total));
  // Nested parallel sections run serially instead of oversubscribing.
  if (workers <= 1 || g_inside_parallel_for) {
    for (Index i = begin; i < end; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{begin};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  auto body = [&] {
    g_inside_parallel_for = true;
    for (;;) {
      Index i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= end || failed.load(std::memory_order_relaxed)) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) error = std::current_exception();
        break;
      }
    }
    g_inside_parallel_for = false;
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (failed) std::rethrow_exception(error);
}

}  // namespace recbench
