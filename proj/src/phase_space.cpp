#include "qha/phase_space.hpp"

#include <cmath>
#include <stdexcept>

#include "qha/fft.hpp"
#include "qha/parallel.hpp"

namespace qha {

PhaseFunction sample_phase_function(const PhaseGrid& grid,
                                    const std::function<cd(PhasePoint)>& f, int workers) {
  grid.validate();
  const int m = grid.points;
  PhaseFunction F{grid, std::vector<cd>(static_cast<std::size_t>(m) * m)};
  parallel_for(m, workers, [&](std::size_t ix) {
    const double x = grid.node1(static_cast<int>(ix));
    cd* row = F.values.data() + ix * m;
    for (int ik = 0; ik < m; ++ik) row[ik] = f({x, grid.node1(ik)});
  });
  return F;
}

PhaseFunction symplectic_fourier(const PhaseFunction& F, int workers) {
  F.grid.validate();
  const int m = F.grid.points;
  if (m < 4)
    throw std::invalid_argument("symplectic_fourier: grid.points_per_axis must be >= 4, got " +
                                std::to_string(m));
  if (F.values.size() != static_cast<std::size_t>(m) * m)
    throw std::invalid_argument("symplectic_fourier: value array does not match grid");

  const double h = F.grid.spacing();
  // Centered DFT per axis: out_p = h (-1)^{M/2} (-1)^p sum_j (-1)^j F_j w^{jp};
  // the two per-axis sign factors (-1)^{M/2} square to +1 on a square grid.
  std::vector<cd> buf(F.values);
  for (int j = 0; j < m; ++j) {
    cd* row = buf.data() + static_cast<std::size_t>(j) * m;
    for (int k = 0; k < m; ++k)
      if ((j + k) & 1) row[k] = -row[k];
  }
  fft::dft2_forward(buf.data(), m);
  const double scale = h * h;
  for (int p = 0; p < m; ++p) {
    cd* row = buf.data() + static_cast<std::size_t>(p) * m;
    for (int q = 0; q < m; ++q) row[q] *= ((p + q) & 1) ? -scale : scale;
  }

  // Rotation zeta -> J zeta on the frequency grid: S[p][q] = Fhat[q][(M-p) mod M].
  PhaseFunction S{F.grid.dual(), std::vector<cd>(static_cast<std::size_t>(m) * m)};
  parallel_for(m, workers, [&](std::size_t p) {
    const int np = (m - static_cast<int>(p)) % m;
    cd* row = S.values.data() + p * m;
    for (int q = 0; q < m; ++q) row[q] = buf[static_cast<std::size_t>(q) * m + np];
  });
  return S;
}

double lp_norm(const PhaseFunction& F, double p) {
  if (std::isinf(p)) return linf_norm(F);
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1 or inf");
  const double h2 = F.grid.spacing() * F.grid.spacing();
  std::vector<double> terms(F.values.size());
  for (std::size_t i = 0; i < F.values.size(); ++i) terms[i] = std::pow(std::abs(F.values[i]), p);
  return std::pow(h2 * pairwise_sum(std::span<const double>(terms)), 1.0 / p);
}

double l2_norm(const PhaseFunction& F) {
  const double h2 = F.grid.spacing() * F.grid.spacing();
  std::vector<double> terms(F.values.size());
  for (std::size_t i = 0; i < F.values.size(); ++i) terms[i] = std::norm(F.values[i]);
  return std::sqrt(h2 * pairwise_sum(std::span<const double>(terms)));
}

double linf_norm(const PhaseFunction& F) {
  double mx = 0.0;
  for (const cd& v : F.values) mx = std::max(mx, std::abs(v));
  return mx;
}

cd inner(const PhaseFunction& F, const PhaseFunction& G) {
  if (!F.grid.same_as(G.grid)) throw std::invalid_argument("inner: mismatched grids");
  const double h2 = F.grid.spacing() * F.grid.spacing();
  std::vector<cd> terms(F.values.size());
  for (std::size_t i = 0; i < F.values.size(); ++i) terms[i] = F.values[i] * std::conj(G.values[i]);
  return h2 * pairwise_sum(std::span<const cd>(terms));
}

double boundary_max(const PhaseFunction& F) {
  const int m = F.grid.points;
  double mx = 0.0;
  for (int k = 0; k < m; ++k) {
    mx = std::max(mx, std::abs(F.at(0, k)));
    mx = std::max(mx, std::abs(F.at(m - 1, k)));
    mx = std::max(mx, std::abs(F.at(k, 0)));
    mx = std::max(mx, std::abs(F.at(k, m - 1)));
  }
  return mx;
}

PhaseFunction multiply(const PhaseFunction& F, const PhaseFunction& G) {
  if (!F.grid.same_as(G.grid)) throw std::invalid_argument("multiply: mismatched grids");
  PhaseFunction R = F;
  for (std::size_t i = 0; i < R.values.size(); ++i) R.values[i] *= G.values[i];
  return R;
}

PhaseFunction add(const PhaseFunction& F, const PhaseFunction& G) {
  if (!F.grid.same_as(G.grid)) throw std::invalid_argument("add: mismatched grids");
  PhaseFunction R = F;
  for (std::size_t i = 0; i < R.values.size(); ++i) R.values[i] += G.values[i];
  return R;
}

PhaseFunction scale(const PhaseFunction& F, cd c) {
  PhaseFunction R = F;
  for (auto& v : R.values) v *= c;
  return R;
}

PhaseFunction convolve(const PhaseFunction& a, const PhaseFunction& b, int workers) {
  PhaseFunction fa = symplectic_fourier(a, workers);
  PhaseFunction fb = symplectic_fourier(b, workers);
  return symplectic_fourier(multiply(fa, fb), workers);
}

}  // namespace qha
