#include "qha/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cstring>
#include <vector>

namespace qha {

namespace {
std::atomic<int> g_default_workers{0};

template <typename T>
T pairwise_sum_impl(const T* v, std::size_t n) {
  if (n <= 8) {
    T s{};
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum_impl(v, half) + pairwise_sum_impl(v + half, n - half);
}
}  // namespace

void set_default_workers(int w) { g_default_workers.store(w < 0 ? 0 : w); }
int default_workers() { return g_default_workers.load(); }

int resolve_workers(int w) {
  if (w <= 0) w = g_default_workers.load();
  if (w <= 0) w = omp_get_max_threads();
  return std::max(1, w);
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& f) {
  const int w = resolve_workers(workers);
  if (w == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
#pragma omp parallel for schedule(static) num_threads(w)
  for (long long i = 0; i < static_cast<long long>(n); ++i) f(static_cast<std::size_t>(i));
}

cd pairwise_sum(std::span<const cd> v) { return pairwise_sum_impl(v.data(), v.size()); }
double pairwise_sum(std::span<const double> v) { return pairwise_sum_impl(v.data(), v.size()); }

void accumulate_terms(std::size_t n, std::size_t len, int workers,
                      const std::function<void(std::size_t, cd*)>& emit_add, cd* out) {
  if (n == 0) {
    std::memset(out, 0, len * sizeof(cd));
    return;
  }
  // Group count fixed by n alone (never by worker count).
  const std::size_t groups = std::min<std::size_t>(64, n);
  const std::size_t per = (n + groups - 1) / groups;
  std::vector<std::vector<cd>> partial(groups);

  parallel_for(groups, workers, [&](std::size_t g) {
    auto& buf = partial[g];
    buf.assign(len, cd{});
    const std::size_t lo = g * per, hi = std::min(n, lo + per);
    for (std::size_t k = lo; k < hi; ++k) emit_add(k, buf.data());
  });

  // Pairwise fold over groups: partial[i] += partial[i + s], fixed pattern.
  for (std::size_t s = 1; s < groups; s *= 2) {
    for (std::size_t i = 0; i + s < groups; i += 2 * s) {
      cd* a = partial[i].data();
      const cd* b = partial[i + s].data();
      for (std::size_t j = 0; j < len; ++j) a[j] += b[j];
    }
  }
  std::memcpy(out, partial[0].data(), len * sizeof(cd));
}

}  // namespace qha
