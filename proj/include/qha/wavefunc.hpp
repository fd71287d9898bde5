#pragma once

#include <functional>
#include <vector>

#include "qha/grids.hpp"
#include "qha/hermite.hpp"
#include "qha/phase_space.hpp"

namespace qha {

struct WaveFunction {
  LineGrid grid;
  std::vector<cd> values;
};

WaveFunction sample_wave(const LineGrid& grid, const std::function<cd(double)>& f);
WaveFunction hermite_wave(const HermiteBasis& basis, int n);
// h_0(t) = 2^{1/4} exp(-pi t^2)
WaveFunction gaussian_ground(const LineGrid& grid);
// rho(z0) applied to the ground Gaussian via the explicit action
// exp(-pi i x0 xi0) exp(2 pi i t xi0) g0(t - x0); rejects |x0| > T/2.
WaveFunction shifted_gaussian(PhasePoint z0, const LineGrid& grid);

cd inner(const WaveFunction& f, const WaveFunction& g);  // linear in f, conjugate in g
double l2_norm(const WaveFunction& f);
WaveFunction add(const WaveFunction& f, const WaveFunction& g);
WaveFunction scale(const WaveFunction& f, cd c);

// Centered transform integral(f(t) exp(-2 pi i w t) dt) on the induced frequency
// grid {half_width M_t/(4T), M_t}; applying it twice gives f(-t) on the original grid.
WaveFunction fourier_wave(const WaveFunction& f);

// Band-limited off-grid evaluation: Gaussian-windowed sinc over 32 neighbors per
// side (window variance 2K/pi); exact on grid nodes, ~1e-11 off-grid for
// functions oversampled 2x like the sized Hermite tables.
cd eval_interp(const WaveFunction& f, double t);

// rho(x,xi) f(t) = exp(-pi i x xi) exp(2 pi i t xi) f(t-x); rejects |x| > T/2.
WaveFunction apply_rho_to_wave(PhasePoint z, const WaveFunction& f);

// A(f,g)(x,xi) = integral(f(t+x/2) conj(g(t-x/2)) exp(-2 pi i xi t) dt) by
// trapezoid quadrature; rejects |x| > T.
cd ambiguity(const WaveFunction& f, const WaveFunction& g, PhasePoint z);

// A(f,g) sampled on a phase grid; rows share one window product, and the
// xi-sums run as one matrix product against a precomputed phase table.
PhaseFunction ambiguity_grid(const WaveFunction& f, const WaveFunction& g,
                             const PhaseGrid& grid, int workers = 0);

// out[ix][k] = dt * sum_j rows[ix][j] exp(-2 pi i xi_k t_j): the xi-quadrature
// shared by the ambiguity and kernel-slice grid paths (one phase table, one
// matrix product). rows is M x M_t, row index paired with grid x nodes.
PhaseFunction xi_quadrature_rows(const std::vector<cd>& rows, const LineGrid& line,
                                 const PhaseGrid& grid, int workers = 0);

// Max |ambiguity_hermite(m, n, z) - quadrature ambiguity| over m, n < block at
// one z. The quadrature side evaluates the defining integral for the whole
// block with shared shifted tables and one matrix product, so the closed form
// can be gated over full index ranges cheaply.
double ambiguity_gate_error(const HermiteBasis& basis, PhasePoint z, int block,
                            int workers = 0);

struct WignerGrid {
  PhaseFunction values;
  double boundary_ambiguity_max = 0.0;
  bool boundary_ok = true;  // ambiguity samples < 1e-12 on the grid boundary
};

// W(f,g) = symplectic Fourier transform of the ambiguity samples.
WignerGrid wigner(const WaveFunction& f, const WaveFunction& g, const PhaseGrid& grid,
                  int workers = 0);

}  // namespace qha
