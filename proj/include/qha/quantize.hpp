#pragma once

#include <cstddef>
#include <cstdint>

#include "qha/operators.hpp"
#include "qha/phase_space.hpp"
#include "qha/wavefunc.hpp"

namespace qha {

struct QuantizeOptions {
  double cull_eps = 1e-12;    // l1 quadrature mass allowed to be dropped
  double boundary_tol = 1e-10;
  int workers = 0;
};

struct QuantizeDiag {
  double boundary_linf = 0.0;
  bool boundary_ok = true;
  std::size_t nodes_total = 0;
  std::size_t nodes_used = 0;
  int rank_used = -1;  // -1: dense per-node path; >= 0: rank-one update path
};

// a * S = integral a(z) rho(z) S rho(-z) dz by grid quadrature over a's grid.
// Conjugation by rho(z) is isometric, so nodes whose combined l1 weight stays
// under cull_eps * total can be dropped with the same bound on the error.
// When the SVD of S shows low rank, each node contributes rank-one updates
// instead of two dense products.
OperatorMatrix conv_fun_op(const PhaseFunction& a, const OperatorMatrix& s,
                           const QuantizeOptions& opt = {}, QuantizeDiag* diag = nullptr);

// L_a^tau = integral (F_sigma a)(z) e^{-pi i (2 tau - 1) x xi} rho(z) dz,
// quadratured over the dual grid carrying F_sigma a. The node factor is
// skipped exactly when 2 tau - 1 == 0, so weyl_quantize is bit-identical to
// tau_quantize(a, 0.5, ...). basis_fp labels the Hermite basis the matrix
// refers to; the basis table itself is not needed.
OperatorMatrix tau_quantize(const PhaseFunction& a, double tau, int dim, std::uint64_t basis_fp,
                            const QuantizeOptions& opt = {}, QuantizeDiag* diag = nullptr);
OperatorMatrix weyl_quantize(const PhaseFunction& a, int dim, std::uint64_t basis_fp,
                             const QuantizeOptions& opt = {}, QuantizeDiag* diag = nullptr);

// f -> integral a(z) <f, rho(z) phi> rho(z) psi dz, i.e. a * (psi tensor phi).
OperatorMatrix localization(const PhaseFunction& a, const WaveFunction& phi,
                            const WaveFunction& psi, const HermiteBasis& basis,
                            const QuantizeOptions& opt = {}, QuantizeDiag* diag = nullptr);

}  // namespace qha
