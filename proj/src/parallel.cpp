#include "nonauto/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace nonauto {

namespace {

std::atomic<int> g_threads{0};

int auto_threads() {
  if (const char* env = std::getenv("NONAUTO_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

void set_thread_count(int threads) { g_threads.store(threads < 0 ? 0 : threads); }

int thread_count() {
  const int n = g_threads.load();
  return n > 0 ? n : auto_threads();
}

}  // namespace nonauto
