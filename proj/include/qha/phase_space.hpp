#pragma once

#include <functional>
#include <vector>

#include "qha/grids.hpp"

namespace qha {

// Complex function sampled on a centered phase-space grid.
// values[ix * M + ik] = F(x_{ix}, xi_{ik}).
struct PhaseFunction {
  PhaseGrid grid;
  std::vector<cd> values;

  int size() const { return grid.points; }
  cd& at(int ix, int ik) { return values[static_cast<std::size_t>(ix) * grid.points + ik]; }
  cd at(int ix, int ik) const { return values[static_cast<std::size_t>(ix) * grid.points + ik]; }
};

PhaseFunction sample_phase_function(const PhaseGrid& grid,
                                    const std::function<cd(PhasePoint)>& f, int workers = 0);

// Symplectic Fourier transform F_sigma(F)(zeta) = int F(z) e^{-2 pi i sigma(zeta, z)} dz:
// the centered discrete Fourier transform (h^2-normalized, pre/post modulated so
// frequency samples are centered) composed with the rotation zeta -> J zeta.
// The result is sampled on grid.dual(); applying the transform twice returns the
// original samples on the original grid, exactly as a discrete map.
PhaseFunction symplectic_fourier(const PhaseFunction& F, int workers = 0);

// Quadrature norms/pairings on the grid (trapezoid = h^2-weighted sums).
double lp_norm(const PhaseFunction& F, double p);  // p >= 1; p = inf -> max modulus
double l2_norm(const PhaseFunction& F);
double linf_norm(const PhaseFunction& F);
cd inner(const PhaseFunction& F, const PhaseFunction& G);  // h^2 sum F conj(G)
// Largest modulus on the outermost node ring (boundary-decay diagnostics).
double boundary_max(const PhaseFunction& F);

PhaseFunction multiply(const PhaseFunction& F, const PhaseFunction& G);
PhaseFunction add(const PhaseFunction& F, const PhaseFunction& G);
PhaseFunction scale(const PhaseFunction& F, cd c);

// Phase-space convolution (a * b)(z) = int a(w) b(z - w) dw, computed as
// F_sigma(F_sigma(a) . F_sigma(b)); result lives on the original grid.
PhaseFunction convolve(const PhaseFunction& a, const PhaseFunction& b, int workers = 0);

}  // namespace qha
