#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>

namespace qha {

using cd = std::complex<double>;

// Process-wide default worker count; 0 means "all hardware threads".
void set_default_workers(int w);
int default_workers();
// Map a per-call worker request (0 = use default) to a concrete thread count.
int resolve_workers(int w);

// f(i) for independent items i in [0, n); no ordering guarantees.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& f);

// Fixed-shape pairwise tree sum: the association depends only on v.size(),
// never on the worker count, so parallel callers that fill `v` in index order
// get bit-identical results for every thread count.
cd pairwise_sum(std::span<const cd> v);
double pairwise_sum(std::span<const double> v);

// sum of n generated terms accumulated into out[0..len).  Terms are split into
// a fixed number of contiguous index ranges; each range is summed serially in
// ascending k by emit_add(k, partial), and the per-range partials are combined
// with a pairwise tree.  The grouping depends only on n, so the result is
// bit-identical regardless of worker count; workers == 1 is the serial
// reference path (same order, same code).
void accumulate_terms(std::size_t n, std::size_t len, int workers,
                      const std::function<void(std::size_t k, cd* partial)>& emit_add,
                      cd* out);

}  // namespace qha
