#include "smallball/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace smallball {

std::size_t max_workers() {
  const char* env = std::getenv("SMALLBALL_VI_THREADS");
  if (!env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || v < 1) return 1;
  return static_cast<std::size_t>(v);
}

void for_chunks(std::size_t total, std::size_t chunk_size,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (total == 0) return;
  if (chunk_size == 0) chunk_size = 1;
  const std::size_t nchunks = (total + chunk_size - 1) / chunk_size;
  const std::size_t workers = std::min(max_workers(), nchunks);

  if (workers <= 1) {
    for (std::size_t c = 0; c < nchunks; ++c) {
      const std::size_t b = c * chunk_size;
      fn(c, b, std::min(b + chunk_size, total));
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= nchunks) return;
      const std::size_t b = c * chunk_size;
      try {
        fn(c, b, std::min(b + chunk_size, total));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace smallball
