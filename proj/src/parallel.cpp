#include "plasma_spike/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace plasma_spike {
namespace {

std::atomic<int> g_thread_cap{-1};

int env_thread_cap() {
  if (const char* env = std::getenv("PLASMA_SPIKE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 0;
}

}  // namespace

void set_thread_cap(int threads) { g_thread_cap = std::max(threads, 0); }

int thread_cap() {
  int cap = g_thread_cap.load();
  if (cap < 0) cap = env_thread_cap();
  if (cap == 0) cap = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return cap;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, int threads) {
  const int workers = static_cast<int>(std::min<std::size_t>(count, threads > 0 ? threads : thread_cap()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace plasma_spike
