#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qha/grids.hpp"
#include "qha/hermite.hpp"
#include "qha/phase_space.hpp"
#include "qha/wavefunc.hpp"

namespace qha {

// Dense truncated operator in the Hermite basis; basis_fp ties it to the basis
// that produced it, and binary operations insist the fingerprints match.
struct OperatorMatrix {
  int dim = 0;
  std::vector<cd> entries;  // row-major dim x dim
  std::uint64_t basis_fp = 0;

  cd& at(int m, int n) { return entries[static_cast<std::size_t>(m) * dim + n]; }
  cd at(int m, int n) const { return entries[static_cast<std::size_t>(m) * dim + n]; }
};

struct SingularSpectrum {
  std::vector<double> values;  // non-increasing, >= 0
  int dim = 0;
};

OperatorMatrix zero_operator(int dim, std::uint64_t basis_fp);
OperatorMatrix identity_op(int dim, std::uint64_t basis_fp);
// diag((-1)^n): the Hermite-basis parity operator.
OperatorMatrix parity_op(int dim, std::uint64_t basis_fp);

// Expansion coefficients <f, h_n> for n < basis.size.
std::vector<cd> coefficients(const WaveFunction& f, const HermiteBasis& basis, int workers = 0);
// f tensor g, acting as h -> <h, g> f; trace <f, g>.
OperatorMatrix rank_one(const WaveFunction& f, const WaveFunction& g, const HermiteBasis& basis,
                        int workers = 0);

// Matrix of rho(z): entry (m, n) = <rho(z) h_n, h_m> = conj(A(h_m, h_n)(z)),
// filled diagonal by diagonal from one scaled-Laguerre column per offset.
OperatorMatrix rho_matrix(PhasePoint z, const HermiteBasis& basis);
// Fill a caller-owned dim x dim buffer with rho(z); no allocation beyond the
// per-diagonal Laguerre columns.
void rho_fill(PhasePoint z, int dim, cd* out);
// inout += coef * rho(z) without materializing the matrix.
void add_scaled_rho(PhasePoint z, int dim, cd coef, cd* inout);
// outs[i] += coefs[i] * rho(z); the Laguerre columns are computed once.
void add_scaled_rho_multi(PhasePoint z, int dim, std::span<const cd> coefs, cd* const* outs);

cd trace(const OperatorMatrix& a);
double hs_norm(const OperatorMatrix& a);
double max_abs_entry(const OperatorMatrix& a);
OperatorMatrix multiply(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix adjoint(const OperatorMatrix& a);
OperatorMatrix op_add(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix op_sub(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix op_scale(const OperatorMatrix& a, cd c);

// Singular values, descending; self-adjoint inputs (detected via
// ||T - T*|| / ||T|| < 1e-12 in HS norm) go through the cheaper eigenvalue path.
SingularSpectrum singular_spectrum(const OperatorMatrix& a);
// l^p norm of the values, smallest-first summation; p >= 1 or infinity.
double schatten_from_values(std::span<const double> s, double p);
double schatten_norm(const OperatorMatrix& a, double p);

// F_W(T)(z) = tr(T rho(-z)), evaluated per target by walking the diagonals of
// rho(-z); no N x N temporary per target.
std::vector<cd> fourier_wigner(const OperatorMatrix& t, std::span<const PhasePoint> targets,
                               int workers = 0);

// Grid fast path: F_W(T)(x, xi) is the xi-transform in t of the integral-kernel
// slice K(t + x/2, t - x/2) with K = H^T T conj(H); requires the phase grid to
// align with the sample lattice (h / (2 dt) integral, L <= T).
PhaseFunction fourier_wigner_grid(const OperatorMatrix& t, const HermiteBasis& basis,
                                  const PhaseGrid& grid, int workers = 0);

// S * T(z) = tr(S rho(z) P T P rho(-z)) per target (two matrix products each).
std::vector<cd> conv_op_op(const OperatorMatrix& s, const OperatorMatrix& t,
                           std::span<const PhasePoint> targets, int workers = 0);
// Grid path via the convolution theorem: inverse symplectic Fourier transform of
// F_W(S) . F_W(T) computed on grid.dual().
PhaseFunction conv_op_op_grid(const OperatorMatrix& s, const OperatorMatrix& t,
                              const HermiteBasis& basis, const PhaseGrid& grid, int workers = 0);
// Rank-one fast path: (f tensor g) * (u tensor v)(z) = conj(A(g, Pu)(z)) A(f, Pv)(z).
PhaseFunction conv_rank_one_grid(const WaveFunction& f, const WaveFunction& g,
                                 const WaveFunction& u, const WaveFunction& v,
                                 const PhaseGrid& grid, int workers = 0);

// u(-t) on the same grid (node 0 has no mirror node; its value decays below
// 1e-12 under the sizing rule and is set to zero).
WaveFunction parity_wave(const WaveFunction& u);

void write_operator_blob(const OperatorMatrix& a, const std::string& path);
OperatorMatrix read_operator_blob(const std::string& path);
void write_operator_csv(const OperatorMatrix& a, const std::string& path);
void write_spectrum_csv(const SingularSpectrum& s, const std::string& path);  // n,s_n

}  // namespace qha
