// Compares the serial reference path (workers = 1) against the OpenMP path
// (workers = 0, all hardware threads) for the heavy kernels.  The reductions
// are fixed-shape, so the two paths must agree bit for bit; any mismatch is a
// bug and fails the run.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qha/hermite.hpp"
#include "qha/measures.hpp"
#include "qha/operators.hpp"
#include "qha/parallel.hpp"
#include "qha/phase_space.hpp"
#include "qha/quantize.hpp"
#include "qha/restriction.hpp"
#include "qha/wavefunc.hpp"

using namespace qha;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

int hardware_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

struct Row {
  const char* name;
  double serial_s, parallel_s;
  bool identical;
};

bool same_bits(const std::vector<cd>& a, const std::vector<cd>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(cd)) == 0;
}

Row run_case(const char* name, const std::function<std::vector<cd>(int)>& kernel) {
  const double t0 = now_seconds();
  const std::vector<cd> serial = kernel(1);
  const double t1 = now_seconds();
  const std::vector<cd> parallel = kernel(0);
  const double t2 = now_seconds();
  return {name, t1 - t0, t2 - t1, same_bits(serial, parallel)};
}

}  // namespace

int main() {
  std::printf("workers: serial=1, parallel=%d\n\n", hardware_workers());
  std::vector<Row> rows;

  rows.push_back(run_case("accumulate_terms 1e7", [](int w) {
    std::vector<cd> out(4);
    accumulate_terms(
        10'000'000, out.size(), w,
        [](std::size_t k, cd* partial) {
          partial[k % 4] += cd(std::sqrt(k + 1.0), 1.0 / (k + 1.0));
        },
        out.data());
    return out;
  }));

  const HermiteBasis basis = hermite_basis_cached(64, default_line_grid(64), 0);
  const WaveFunction f = hermite_wave(basis, 5), g = hermite_wave(basis, 2);
  rows.push_back(run_case("ambiguity_grid 144^2", [&](int w) {
    return ambiguity_grid(f, g, PhaseGrid{6.0, 144}, w).values;
  }));

  const DiscreteMeasure circ = make_circle(1.0, 512, 1.0);
  const std::vector<cd> ones(circ.size(), cd(1.0, 0.0));
  rows.push_back(run_case("extension_matrix 512x128^2", [&](int w) {
    return extension_matrix(ones, circ, 0.5, 128, 0, w).entries;
  }));

  const PhaseGrid cg{4.0, 64};
  const PhaseFunction a = sample_phase_function(
      cg,
      [](PhasePoint z) {
        return cd(std::cos(1.7 * z.x), std::sin(0.9 * z.xi)) * std::exp(-PI * abs2(z));
      },
      0);
  OperatorMatrix s = zero_operator(64, 0);
  for (int m = 0; m < 16; ++m)
    for (int n = 0; n < 16; ++n)
      s.entries[static_cast<std::size_t>(m) * 64 + n] = cd(1.0 / (1 + m + 2 * n), 0.1 * m - 0.05 * n);
  rows.push_back(run_case("conv_fun_op 64^2 grid", [&](int w) {
    QuantizeOptions qo;
    qo.workers = w;
    return conv_fun_op(a, s, qo).entries;
  }));

  const DiscreteMeasure big = make_circle(1.0, 4096, 1.0);
  std::vector<PhasePoint> targets;
  for (int i = 0; i < 2048; ++i) {
    const double th = 2.0 * PI * i / 2048.0, rho = 1.0 + i % 128;
    targets.push_back({rho * std::cos(th), rho * std::sin(th)});
  }
  rows.push_back(run_case("fourier_of_measure 4096x2048", [&](int w) {
    return fourier_of_measure(big, targets, w);
  }));

  std::printf("%-28s %10s %10s %8s %10s\n", "kernel", "serial(s)", "openmp(s)", "speedup",
              "identical");
  bool all_ok = true;
  for (const Row& r : rows) {
    std::printf("%-28s %10.3f %10.3f %7.2fx %10s\n", r.name, r.serial_s, r.parallel_s,
                r.serial_s / std::max(r.parallel_s, 1e-12), r.identical ? "yes" : "NO");
    all_ok = all_ok && r.identical;
  }
  if (!all_ok) {
    std::fprintf(stderr, "\nerror: parallel output differs from serial reference\n");
    return 1;
  }
  return 0;
}
