#pragma once

#include <cstddef>
#include <vector>

namespace bilap4 {

/// Worker count used by parallel_for / parallel_reduce_sum. Defaults to the
/// hardware concurrency, capped at 8.
int num_threads();
void set_num_threads(int n);

namespace detail {
// Runs fn(ctx, t) for t in [0, ntasks), one task per worker.
void run_tasks(int ntasks, void (*fn)(void*, int), void* ctx);
inline size_t chunk_size(size_t n, int nt) {
  return (n + static_cast<size_t>(nt) - 1) / static_cast<size_t>(nt);
}
}  // namespace detail

/// Static partition of [0, n) over the worker threads. Chunk boundaries
/// depend only on n and the thread count, so runs are reproducible.
template <class F>
void parallel_for(size_t n, F&& f) {
  if (n == 0) return;
  int nt = num_threads();
  if (nt <= 1 || n < 8192) {
    f(size_t{0}, n);
    return;
  }
  size_t chunk = detail::chunk_size(n, nt);
  struct Ctx {
    F* f;
    size_t n, chunk;
  } ctx{&f, n, chunk};
  detail::run_tasks(
      nt,
      [](void* p, int t) {
        auto* c = static_cast<Ctx*>(p);
        size_t lo = static_cast<size_t>(t) * c->chunk;
        size_t hi = lo + c->chunk < c->n ? lo + c->chunk : c->n;
        if (lo < hi) (*c->f)(lo, hi);
      },
      &ctx);
}

/// Deterministic parallel sum: fixed chunking, partials combined in chunk
/// order so the result is independent of thread scheduling.
template <class F>
double parallel_reduce_sum(size_t n, F&& chunk_sum) {
  if (n == 0) return 0.0;
  int nt = num_threads();
  if (nt <= 1 || n < 8192) return chunk_sum(size_t{0}, n);
  size_t chunk = detail::chunk_size(n, nt);
  std::vector<double> partial(static_cast<size_t>(nt), 0.0);
  struct Ctx {
    F* f;
    std::vector<double>* partial;
    size_t n, chunk;
  } ctx{&chunk_sum, &partial, n, chunk};
  detail::run_tasks(
      nt,
      [](void* p, int t) {
        auto* c = static_cast<Ctx*>(p);
        size_t lo = static_cast<size_t>(t) * c->chunk;
        size_t hi = lo + c->chunk < c->n ? lo + c->chunk : c->n;
        if (lo < hi) (*c->partial)[static_cast<size_t>(t)] = (*c->f)(lo, hi);
      },
      &ctx);
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

}  // namespace bilap4
