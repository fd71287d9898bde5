#include "qha/wavefunc.hpp"

#include <cmath>
#include <stdexcept>

#include "qha/fft.hpp"
#include "qha/linalg.hpp"
#include "qha/parallel.hpp"

namespace qha {

namespace {

constexpr int kInterpHalfTaps = 32;
// Gaussian window variance 2K/pi balances truncation and spectral distortion.
const double kWindowVar = 2.0 * kInterpHalfTaps / PI;

void check_same_grid(const WaveFunction& f, const WaveFunction& g, const char* who) {
  if (!f.grid.same_as(g.grid)) throw std::invalid_argument(std::string(who) + ": mismatched grids");
}

// Integer sample offset for shift/spacing when that ratio is an integer to 1e-9.
bool aligned_shift(double shift, double dt, long long& steps) {
  const double s = shift / dt;
  const double r = std::llround(s);
  if (std::fabs(s - r) < 1e-9) {
    steps = static_cast<long long>(r);
    return true;
  }
  return false;
}

cd sample_or_zero(const WaveFunction& f, long long j) {
  return (j >= 0 && j < f.grid.points) ? f.values[static_cast<std::size_t>(j)] : cd(0.0, 0.0);
}

// f evaluated at node(j) + shift, for all j, into out (zero beyond the grid).
void shifted_samples(const WaveFunction& f, double shift, cd* out) {
  const int mt = f.grid.points;
  long long steps = 0;
  if (aligned_shift(shift, f.grid.spacing(), steps)) {
    for (int j = 0; j < mt; ++j) out[j] = sample_or_zero(f, j + steps);
    return;
  }
  for (int j = 0; j < mt; ++j) out[j] = eval_interp(f, f.grid.node(j) + shift);
}

}  // namespace

WaveFunction sample_wave(const LineGrid& grid, const std::function<cd(double)>& f) {
  grid.validate();
  WaveFunction w{grid, std::vector<cd>(grid.points)};
  for (int j = 0; j < grid.points; ++j) w.values[j] = f(grid.node(j));
  return w;
}

WaveFunction hermite_wave(const HermiteBasis& basis, int n) {
  if (n < 0 || n >= basis.size)
    throw std::invalid_argument("hermite_wave: index outside basis range");
  WaveFunction w{basis.grid, std::vector<cd>(basis.grid.points)};
  const double* r = basis.row(n);
  for (int j = 0; j < basis.grid.points; ++j) w.values[j] = cd(r[j], 0.0);
  return w;
}

WaveFunction gaussian_ground(const LineGrid& grid) {
  const double c = std::pow(2.0, 0.25);
  return sample_wave(grid, [c](double t) { return cd(c * std::exp(-PI * t * t), 0.0); });
}

WaveFunction shifted_gaussian(PhasePoint z0, const LineGrid& grid) {
  grid.validate();
  if (std::fabs(z0.x) > 0.5 * grid.half_width)
    throw std::invalid_argument("shifted_gaussian: |x0| > T/2, shifted window leaves the grid");
  const double c = std::pow(2.0, 0.25);
  const cd front = std::polar(1.0, -PI * z0.x * z0.xi);
  WaveFunction w{grid, std::vector<cd>(grid.points)};
  for (int j = 0; j < grid.points; ++j) {
    const double t = grid.node(j);
    w.values[j] =
        front * std::polar(1.0, 2.0 * PI * t * z0.xi) * (c * std::exp(-PI * (t - z0.x) * (t - z0.x)));
  }
  return w;
}

cd inner(const WaveFunction& f, const WaveFunction& g) {
  check_same_grid(f, g, "inner");
  std::vector<cd> terms(f.values.size());
  for (std::size_t j = 0; j < terms.size(); ++j) terms[j] = f.values[j] * std::conj(g.values[j]);
  return f.grid.spacing() * pairwise_sum(std::span<const cd>(terms));
}

double l2_norm(const WaveFunction& f) {
  std::vector<double> terms(f.values.size());
  for (std::size_t j = 0; j < terms.size(); ++j) terms[j] = std::norm(f.values[j]);
  return std::sqrt(f.grid.spacing() * pairwise_sum(std::span<const double>(terms)));
}

WaveFunction add(const WaveFunction& f, const WaveFunction& g) {
  check_same_grid(f, g, "add");
  WaveFunction r = f;
  for (std::size_t j = 0; j < r.values.size(); ++j) r.values[j] += g.values[j];
  return r;
}

WaveFunction scale(const WaveFunction& f, cd c) {
  WaveFunction r = f;
  for (auto& v : r.values) v *= c;
  return r;
}

WaveFunction fourier_wave(const WaveFunction& f) {
  f.grid.validate();
  const int mt = f.grid.points;
  const double dt = f.grid.spacing();
  std::vector<cd> buf(f.values);
  for (int j = 1; j < mt; j += 2) buf[j] = -buf[j];
  fft::dft1_forward(buf.data(), mt);
  const double base = (mt / 2 % 2 == 0) ? dt : -dt;
  for (int p = 0; p < mt; ++p) buf[p] *= (p % 2 == 0) ? base : -base;
  return {LineGrid{mt / (4.0 * f.grid.half_width), mt}, std::move(buf)};
}

cd eval_interp(const WaveFunction& f, double t) {
  const int mt = f.grid.points;
  const double dt = f.grid.spacing();
  const double u = (t - f.grid.node(0)) / dt;
  const double fl = std::floor(u);
  const int jc = static_cast<int>(fl);
  const double frac = u - fl;
  if (frac == 0.0) return sample_or_zero(f, jc);

  const int jlo = jc - kInterpHalfTaps + 1;
  const int jhi = jc + kInterpHalfTaps;
  if (jhi < 0 || jlo >= mt) return cd(0.0, 0.0);

  // sinc(u - j) = (-1)^{jc-j} sin(pi frac) / (pi (u-j)); Gaussian window updated
  // multiplicatively (exact ratio recurrence), three exp calls total.
  const double s = std::sin(PI * frac) / PI;
  double d = u - jlo;
  double g = std::exp(-d * d / (2.0 * kWindowVar));
  double ratio = std::exp((2.0 * d - 1.0) / (2.0 * kWindowVar));
  const double decay = std::exp(-1.0 / kWindowVar);
  double sign = ((jc - jlo) % 2 == 0) ? 1.0 : -1.0;

  cd acc(0.0, 0.0);
  for (int j = jlo; j <= jhi; ++j) {
    if (j >= 0 && j < mt) acc += f.values[j] * (sign * s / d * g);
    d -= 1.0;
    g *= ratio;
    ratio *= decay;
    sign = -sign;
  }
  return acc;
}

WaveFunction apply_rho_to_wave(PhasePoint z, const WaveFunction& f) {
  f.grid.validate();
  if (std::fabs(z.x) > 0.5 * f.grid.half_width)
    throw std::invalid_argument("apply_rho_to_wave: |x| > T/2, shifted window leaves the grid");
  const int mt = f.grid.points;
  WaveFunction r{f.grid, std::vector<cd>(mt)};
  shifted_samples(f, -z.x, r.values.data());
  const cd front = std::polar(1.0, -PI * z.x * z.xi);
  for (int j = 0; j < mt; ++j)
    r.values[j] *= front * std::polar(1.0, 2.0 * PI * f.grid.node(j) * z.xi);
  return r;
}

cd ambiguity(const WaveFunction& f, const WaveFunction& g, PhasePoint z) {
  check_same_grid(f, g, "ambiguity");
  if (std::fabs(z.x) > f.grid.half_width)
    throw std::invalid_argument("ambiguity: |x| > T, shifted windows leave the grid");
  const int mt = f.grid.points;
  std::vector<cd> fs(mt), gs(mt), terms(mt);
  shifted_samples(f, 0.5 * z.x, fs.data());
  shifted_samples(g, -0.5 * z.x, gs.data());
  for (int j = 0; j < mt; ++j) {
    const double ph = -2.0 * PI * z.xi * f.grid.node(j);
    terms[j] = fs[j] * std::conj(gs[j]) * cd(std::cos(ph), std::sin(ph));
  }
  return f.grid.spacing() * pairwise_sum(std::span<const cd>(terms));
}

PhaseFunction xi_quadrature_rows(const std::vector<cd>& rows, const LineGrid& line,
                                 const PhaseGrid& grid, int workers) {
  grid.validate();
  const int m = grid.points;
  const int mt = line.points;
  if (rows.size() != static_cast<std::size_t>(m) * mt)
    throw std::invalid_argument("xi_quadrature_rows: row block does not match the grids");

  // Conjugated phase table e[k][j] = exp(+2 pi i xi_k t_j); the conjugate
  // transpose inside the matrix product restores the defining kernel.
  std::vector<cd> e(static_cast<std::size_t>(m) * mt);
  parallel_for(m, workers, [&](std::size_t k) {
    const double xi = grid.node1(static_cast<int>(k));
    cd* row = e.data() + k * mt;
    for (int j = 0; j < mt; ++j) {
      const double ph = 2.0 * PI * xi * line.node(j);
      row[j] = cd(std::cos(ph), std::sin(ph));
    }
  });

  PhaseFunction out{grid, std::vector<cd>(static_cast<std::size_t>(m) * m)};
  linalg::matmul(rows.data(), false, e.data(), true, out.values.data(), m, mt, m);
  const double dt = line.spacing();
  for (auto& v : out.values) v *= dt;
  return out;
}

PhaseFunction ambiguity_grid(const WaveFunction& f, const WaveFunction& g,
                             const PhaseGrid& grid, int workers) {
  check_same_grid(f, g, "ambiguity_grid");
  grid.validate();
  if (grid.half_width > f.grid.half_width)
    throw std::invalid_argument("ambiguity_grid: phase grid wider than the wave grid");
  const int m = grid.points;
  const int mt = f.grid.points;

  // Window products, one row per x node.
  std::vector<cd> c(static_cast<std::size_t>(m) * mt);
  parallel_for(m, workers, [&](std::size_t ix) {
    const double x = grid.node1(static_cast<int>(ix));
    std::vector<cd> fs(mt), gs(mt);
    shifted_samples(f, 0.5 * x, fs.data());
    shifted_samples(g, -0.5 * x, gs.data());
    cd* row = c.data() + ix * mt;
    for (int j = 0; j < mt; ++j) row[j] = fs[j] * std::conj(gs[j]);
  });

  return xi_quadrature_rows(c, f.grid, grid, workers);
}

WignerGrid wigner(const WaveFunction& f, const WaveFunction& g, const PhaseGrid& grid,
                  int workers) {
  WignerGrid r;
  PhaseFunction amb = ambiguity_grid(f, g, grid, workers);
  r.boundary_ambiguity_max = boundary_max(amb);
  r.boundary_ok = r.boundary_ambiguity_max < 1e-12;
  r.values = symplectic_fourier(amb, workers);
  return r;
}

double ambiguity_gate_error(const HermiteBasis& basis, PhasePoint z, int block, int workers) {
  if (block < 1 || block > basis.size)
    throw std::invalid_argument("ambiguity_gate_error: block must lie in [1, basis.size]");
  if (std::fabs(z.x) > basis.grid.half_width)
    throw std::invalid_argument("ambiguity_gate_error: |x| > T");
  const int mt = basis.grid.points;
  const double dt = basis.grid.spacing();

  // F[m][j] = h_m(t_j + x/2); G[n][j] = h_n(t_j - x/2) dt e^{+2 pi i xi t_j}, so
  // the conjugate transpose in the product restores the defining integrand
  // conj(g(t - x/2)) e^{-2 pi i xi t} (the h_n are real).
  std::vector<cd> fm(static_cast<std::size_t>(block) * mt);
  std::vector<cd> gm(static_cast<std::size_t>(block) * mt);
  parallel_for(block, workers, [&](std::size_t n) {
    const WaveFunction w = hermite_wave(basis, static_cast<int>(n));
    shifted_samples(w, 0.5 * z.x, fm.data() + n * mt);
    shifted_samples(w, -0.5 * z.x, gm.data() + n * mt);
    for (int j = 0; j < mt; ++j) {
      const double ph = 2.0 * PI * z.xi * basis.grid.node(j);
      gm[n * mt + j] *= cd(std::cos(ph), std::sin(ph)) * dt;
    }
  });
  std::vector<cd> quad(static_cast<std::size_t>(block) * block);
  linalg::matmul(fm.data(), false, gm.data(), true, quad.data(), block, mt, block);

  double worst = 0.0;
  for (int m = 0; m < block; ++m)
    for (int n = 0; n < block; ++n)
      worst = std::max(worst, std::abs(quad[static_cast<std::size_t>(m) * block + n] -
                                       ambiguity_hermite(m, n, z)));
  return worst;
}

}  // namespace qha
