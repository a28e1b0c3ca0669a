#include <atomic>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include <matcol/parallel.hpp>
#include <matcol/types.hpp>

namespace matcol {

namespace {
std::mutex warn_mutex;
}

void warn(const std::string& message) {
  std::lock_guard<std::mutex> lock(warn_mutex);
  std::cerr << "[matcol] warning: " << message << "\n";
}

void require_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) throw ConfigError(what + ": entries must be finite");
}

void require_finite(const Vector& v, const std::string& what) {
  if (!v.allFinite()) throw ConfigError(what + ": entries must be finite");
}

int default_jobs() {
  if (const char* env = std::getenv("MATCOL_JOBS")) {
    const int jobs = std::atoi(env);
    if (jobs >= 1) return jobs;
    warn("ignoring invalid MATCOL_JOBS value");
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(Index count, int jobs, const std::function<void(Index)>& body) {
  if (count <= 0) return;
  const int workers = static_cast<int>(std::min<Index>(std::max(jobs, 1), count));
  if (workers == 1) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<Index> next{0};
  std::mutex error_mutex;
  Index error_index = count;
  std::exception_ptr error;

  auto run = [&]() {
    for (;;) {
      const Index i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(workers - 1);
  for (int t = 1; t < workers; ++t) threads.emplace_back(run);
  run();
  for (auto& t : threads) t.join();

  if (error) std::rethrow_exception(error);
}

}  // namespace matcol
