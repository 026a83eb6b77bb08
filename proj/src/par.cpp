#include "bilap4/par.hpp"

#include <algorithm>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bilap4 {

namespace {
int g_threads = 0;

int default_threads() {
  unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hw, 1u, 8u));
}
}  // namespace

int num_threads() {
  if (g_threads <= 0) g_threads = default_threads();
  return g_threads;
}

void set_num_threads(int n) { g_threads = std::max(1, n); }

namespace detail {

void run_tasks(int ntasks, void (*fn)(void*, int), void* ctx) {
#ifdef _OPENMP
#pragma omp parallel num_threads(ntasks)
  {
    fn(ctx, omp_get_thread_num());
  }
#else
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(ntasks) - 1);
  for (int t = 1; t < ntasks; ++t) pool.emplace_back([=] { fn(ctx, t); });
  fn(ctx, 0);
  for (auto& th : pool) th.join();
#endif
}

}  // namespace detail
}  // namespace bilap4
