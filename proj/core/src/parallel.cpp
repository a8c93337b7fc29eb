#include "locball/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace locball {

std::size_t worker_count() {
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("LOCBALL_THREADS")) {
    try {
      const long value = std::stol(cap);
      if (value > 0) workers = std::min<std::size_t>(workers, static_cast<std::size_t>(value));
    } catch (const std::exception&) {
      // ignored: malformed cap leaves the hardware default in place
    }
  }
  return workers;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const std::size_t block = std::max<std::size_t>(1, count / (workers * 8));

  auto worker = [&] {
    for (;;) {
      const std::size_t begin = next.fetch_add(block);
      if (begin >= count) return;
      const std::size_t end = std::min(count, begin + block);
      for (std::size_t i = begin; i < end; ++i) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          next.store(count);
          return;
        }
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace locball
