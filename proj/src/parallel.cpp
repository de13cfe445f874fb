#include "lor/parallel.hpp"

namespace lor {

namespace {
std::atomic<int> g_threads{0};
}

int thread_count() noexcept {
  const int n = g_threads.load();
  if (n > 0) return n;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_thread_count(int n) noexcept { g_threads.store(n > 0 ? n : 0); }

}  // namespace lor
