#include "qha/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

namespace qha::fft {

namespace {
// Plans are created once per (rank, size) with FFTW_UNALIGNED so they can be
// re-executed on any buffer; plan creation is serialized (FFTW requirement),
// execution via fftw_execute_dft is thread-safe.
std::mutex g_plan_mutex;

fftw_plan plan_for(int rank, int m) {
  static std::map<std::pair<int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = cache.find({rank, m});
  if (it != cache.end()) return it->second;
  std::vector<cd> scratch(rank == 1 ? m : static_cast<std::size_t>(m) * m);
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan plan = rank == 1
                       ? fftw_plan_dft_1d(m, p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED)
                       : fftw_plan_dft_2d(m, m, p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(std::make_pair(rank, m), plan);
  return plan;
}
}  // namespace

void dft1_forward(cd* data, int m) {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan_for(1, m), p, p);
}

void dft2_forward(cd* data, int m) {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan_for(2, m), p, p);
}

}  // namespace qha::fft
