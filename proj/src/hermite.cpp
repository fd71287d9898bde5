#include "qha/hermite.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "qha/parallel.hpp"

namespace qha {

namespace {
constexpr std::uint64_t kBasisFormatVersion = 1;
}

std::uint64_t HermiteBasis::fingerprint() const {
  std::uint64_t h = fnv1a64(&kBasisFormatVersion, sizeof(kBasisFormatVersion));
  h = fnv1a64(&size, sizeof(size), h);
  const std::uint64_t g = grid.fingerprint();
  return fnv1a64(&g, sizeof(g), h);
}

bool hermite_sizing_ok(int N, const LineGrid& grid) {
  const double t_min = std::sqrt(N / PI) + 2.0;
  if (grid.half_width < t_min) return false;
  const double mt_min = 8.0 * std::ceil(grid.half_width * grid.half_width);
  return grid.points >= mt_min;
}

LineGrid minimal_line_grid(int N) {
  const double t_min = std::sqrt(N / PI) + 2.0;
  return {t_min, static_cast<int>(8.0 * std::ceil(t_min * t_min))};
}

LineGrid default_line_grid(int N) {
  const double t_min = std::sqrt(N / PI) + 2.0;
  const int t = 8 * static_cast<int>(std::ceil(t_min / 8.0));
  return {static_cast<double>(t), 8 * t * t};
}

HermiteBasis hermite_basis(int N, const LineGrid& grid, int workers) {
  grid.validate();
  if (N < 1) throw std::invalid_argument("hermite_basis: N must be >= 1");
  if (!hermite_sizing_ok(N, grid)) {
    const LineGrid m = minimal_line_grid(N);
    char msg[256];
    std::snprintf(msg, sizeof(msg),
                  "hermite_basis: grid (T=%g, M_t=%d) too small for N=%d; need T >= %.6g and "
                  "M_t >= 8*ceil(T^2); minimal compliant grid: T=%.6g, M_t=%d",
                  grid.half_width, grid.points, N, m.half_width, m.half_width, m.points);
    throw std::invalid_argument(msg);
  }

  HermiteBasis basis;
  basis.size = N;
  basis.grid = grid;
  const int mt = grid.points;
  basis.table.resize(static_cast<std::size_t>(N) * mt);

  // Three-term recurrence with the Gaussian folded in; node negation symmetry is
  // exact, so h_n(-t) = (-1)^n h_n(t) holds bitwise without explicit mirroring.
  const double c0 = std::pow(2.0, 0.25);
  parallel_for(mt, workers, [&](std::size_t j) {
    const double t = grid.node(static_cast<int>(j));
    double prev = 0.0;
    double cur = c0 * std::exp(-PI * t * t);
    basis.table[j] = cur;
    for (int n = 1; n < N; ++n) {
      const double next =
          2.0 * std::sqrt(PI / n) * t * cur - std::sqrt((n - 1.0) / n) * prev;
      prev = cur;
      cur = next;
      basis.table[static_cast<std::size_t>(n) * mt + j] = cur;
    }
  });
  return basis;
}

namespace {

struct CacheHeader {
  char magic[8];
  std::uint64_t version;
  std::uint64_t n;
  std::uint64_t mt;
  double half_width;
};

constexpr char kMagic[8] = {'Q', 'H', 'B', 'A', 'S', 'I', 'S', '\0'};

}  // namespace

bool save_basis_cache(const HermiteBasis& basis, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) return false;
  CacheHeader hdr{};
  std::memcpy(hdr.magic, kMagic, sizeof(kMagic));
  hdr.version = kBasisFormatVersion;
  hdr.n = static_cast<std::uint64_t>(basis.size);
  hdr.mt = static_cast<std::uint64_t>(basis.grid.points);
  hdr.half_width = basis.grid.half_width;
  const std::size_t bytes = basis.table.size() * sizeof(double);
  const std::uint64_t sum = fnv1a64(basis.table.data(), bytes);
  bool ok = std::fwrite(&hdr, sizeof(hdr), 1, f) == 1 &&
            std::fwrite(basis.table.data(), 1, bytes, f) == bytes &&
            std::fwrite(&sum, sizeof(sum), 1, f) == 1;
  std::fclose(f);
  if (!ok) std::remove(path.c_str());
  return ok;
}

bool try_load_basis_cache(int N, const LineGrid& grid, const std::string& path,
                          HermiteBasis& out) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) return false;
  CacheHeader hdr{};
  bool ok = std::fread(&hdr, sizeof(hdr), 1, f) == 1 &&
            std::memcmp(hdr.magic, kMagic, sizeof(kMagic)) == 0 &&
            hdr.version == kBasisFormatVersion && hdr.n == static_cast<std::uint64_t>(N) &&
            hdr.mt == static_cast<std::uint64_t>(grid.points) &&
            hdr.half_width == grid.half_width;
  if (ok) {
    out.size = N;
    out.grid = grid;
    out.table.resize(static_cast<std::size_t>(N) * grid.points);
    const std::size_t bytes = out.table.size() * sizeof(double);
    std::uint64_t sum = 0;
    ok = std::fread(out.table.data(), 1, bytes, f) == bytes &&
         std::fread(&sum, sizeof(sum), 1, f) == 1 &&
         sum == fnv1a64(out.table.data(), bytes);
  }
  std::fclose(f);
  return ok;
}

HermiteBasis hermite_basis_cached(int N, const LineGrid& grid, int workers) {
  const char* dir = std::getenv("QHA_CACHE_DIR");
  if (!dir || !*dir) return hermite_basis(N, grid, workers);
  char name[128];
  HermiteBasis key;
  key.size = N;
  key.grid = grid;
  std::snprintf(name, sizeof(name), "/hermite_%016llx.bin",
                static_cast<unsigned long long>(key.fingerprint()));
  const std::string path = std::string(dir) + name;
  HermiteBasis loaded;
  if (try_load_basis_cache(N, grid, path, loaded)) return loaded;
  HermiteBasis fresh = hermite_basis(N, grid, workers);
  save_basis_cache(fresh, path);  // best effort; a failed write only costs the cache
  return fresh;
}

double hermite_value(int n, double t) {
  if (n < 0) throw std::invalid_argument("hermite_value: n must be >= 0");
  double prev = 0.0;
  double cur = std::pow(2.0, 0.25) * std::exp(-PI * t * t);
  for (int m = 1; m <= n; ++m) {
    const double next = 2.0 * std::sqrt(PI / m) * t * cur - std::sqrt((m - 1.0) / m) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

void scaled_laguerre_into(int k, int jmax, double x, double* m) {
  if (k < 0 || jmax < 0) throw std::invalid_argument("scaled_laguerre: k, jmax must be >= 0");
  if (!(x >= 0.0)) throw std::invalid_argument("scaled_laguerre: x must be >= 0");
  if (x == 0.0) {
    for (int j = 0; j <= jmax; ++j) m[j] = (k == 0) ? 1.0 : 0.0;
    return;
  }
  m[0] = std::exp(0.5 * k * std::log(x) - 0.5 * std::lgamma(k + 1.0) - 0.5 * x);
  if (jmax == 0) return;
  m[1] = (k + 1.0 - x) * m[0] / std::sqrt(k + 1.0);
  for (int j = 1; j < jmax; ++j) {
    m[j + 1] = ((2.0 * j + k + 1.0 - x) * m[j] - std::sqrt(j * (j + static_cast<double>(k))) * m[j - 1]) /
               std::sqrt((j + 1.0) * (j + 1.0 + k));
  }
}

std::vector<double> scaled_laguerre(int k, int jmax, double x) {
  std::vector<double> m(jmax + 1);
  scaled_laguerre_into(k, jmax, x, m.data());
  return m;
}

cd ambiguity_hermite(int m, int n, PhasePoint z) {
  if (m < 0 || n < 0) throw std::invalid_argument("ambiguity_hermite: indices must be >= 0");
  const double r2 = abs2(z);
  if (r2 == 0.0) return (m == n) ? cd(1.0, 0.0) : cd(0.0, 0.0);
  const double r = std::sqrt(r2);
  const cd w(z.x, z.xi);
  const double x_arg = PI * r2;
  if (m >= n) {
    const int k = m - n;
    const cd phase = std::conj(w) / r;
    cd p(1.0, 0.0);
    for (int i = 0; i < k; ++i) p *= phase;
    return p * scaled_laguerre(k, n, x_arg)[n];
  }
  const int k = n - m;
  const cd phase = -w / r;
  cd p(1.0, 0.0);
  for (int i = 0; i < k; ++i) p *= phase;
  return p * scaled_laguerre(k, m, x_arg)[m];
}

}  // namespace qha
