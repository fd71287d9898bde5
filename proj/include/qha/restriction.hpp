#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qha/hermite.hpp"
#include "qha/measures.hpp"
#include "qha/operators.hpp"
#include "qha/phase_space.hpp"
#include "qha/wavefunc.hpp"

namespace qha {

// Core quadrature sum_j w_j G_j e^{-pi i (2 tau - 1) x_j xi_j} rho(z_j),
// truncated to dim. The node factor is skipped exactly when 2 tau - 1 == 0,
// so the tau = 1/2 twist is bit-identical to the untwisted sum. basis_fp
// labels the Hermite basis the matrix refers to; the sampled table itself is
// never needed because the rho entries come from the closed form.
OperatorMatrix extension_matrix(std::span<const cd> g_at_atoms, const DiscreteMeasure& mu,
                                double tau, int dim, std::uint64_t basis_fp, int workers = 0);

// E_W(G) = sum_j w_j G_j rho(z_j): the operator-valued extension of the
// sampled density G against mu. Operator norm <= sum_j |w_j G_j|.
OperatorMatrix quantum_extension(std::span<const cd> g_at_atoms, const DiscreteMeasure& mu,
                                 const HermiteBasis& basis, int workers = 0);
OperatorMatrix quantum_extension_tau(std::span<const cd> g_at_atoms, const DiscreteMeasure& mu,
                                     double tau, const HermiteBasis& basis, int workers = 0);

// E_sigma(G)(z) = sum_j w_j G_j e^{-2 pi i sigma(z, z_j)}: the scalar-valued
// extension (the symplectic Fourier transform of G dmu) sampled on the grid.
PhaseFunction classical_extension(std::span<const cd> g_at_atoms, const DiscreteMeasure& mu,
                                  const PhaseGrid& grid, int workers = 0);

struct TransferReport {
  double identity_error = 0.0;     // max pointwise gap over atoms, relative sup
  double achieved_floor = 0.0;     // min_j |A(g_{z0}, g_0)(z_j)|
  double theoretical_floor = 0.0;  // e^{-pi R^2 / 2}
  bool identity_pass = false;
  bool floor_pass = false;
  bool pass = false;
};

// Windowed transfer identity, operator side: |F_sigma(Q_T)(z)| with
// Q_T(z) = <T rho(z) g_0, rho(z) g_{z0}> must equal |F_W(T)(z)| |A(g_{z0}, g_0)(z)|
// at every atom. The left side is quadratured from Q_T sampled on `grid` via
// the SVD factors of T; the right side combines the diagonal-walk F_W(T) with
// quadrature ambiguity values, so the two sides share no transform code.
// z0 = mu.center, R = mu.radius_bound, windows on basis.grid.
TransferReport transfer_check_operator(const OperatorMatrix& t, const DiscreteMeasure& mu,
                                       const HermiteBasis& basis, const PhaseGrid& grid,
                                       int workers = 0);

// Function side: F_W of the localization operator with symbol f and windows
// (g_0, g_{z0}) must equal A(g_{z0}, g_0)(z) F_sigma(f)(z) at every atom,
// compared as complex values.
TransferReport transfer_check_function(const PhaseFunction& f, const DiscreteMeasure& mu,
                                       const HermiteBasis& basis, int workers = 0);

// (sum_j w_j Phi_j conj(F_W(T)(z_j)), tr(E_W(Phi) T^*)): the two sides of the
// restriction/extension adjunction, evaluated independently.
std::pair<cd, cd> adjoint_duality_check(std::span<const cd> phi_at_atoms,
                                        const OperatorMatrix& t, const DiscreteMeasure& mu,
                                        const HermiteBasis& basis, int workers = 0);

struct CircleSpectrum {
  std::vector<double> values;    // lambda_n = mass e^{-pi r^2/2} L_n(pi r^2)
  bool closed_form_ok = true;    // recurrence agreed with the quadrature diagonal
  double validation_gap = 0.0;   // worst |closed - quadrature| over the gate range
};

// Eigenvalues of E_W(1, circle(r, mass)), diagonal in the Hermite basis by
// rotation invariance. The closed form is validated on first use against the
// diagonal of a 4096-node quadrature for n < 256; if the gate fails, the
// quadrature diagonal is returned instead (only covers n < 256) and the
// report is flagged.
CircleSpectrum circle_spectrum(double r, int n_max, double mass = 1.0, int workers = 0);

// Least-squares slope of log(per-bin max |values[n]|) against log n over
// geometric bins of [n_lo, n_hi); the bin maxima track the envelope of an
// oscillating sequence, so zeros between peaks do not poison the fit.
double envelope_decay_exponent(std::span<const double> values, std::size_t n_lo,
                               std::size_t n_hi);

struct ThresholdReport {
  double decay_exponent = 0.0;
  std::vector<double> p_grid;
  std::vector<double> tail_ratios;  // (sum_{n > N/2} |l_n|^p) / (sum_{n <= N} |l_n|^p)
  double p_star = std::numeric_limits<double>::quiet_NaN();
  bool crossed = false;      // ratio curve crossed 0.05 inside the grid
  bool not_compact = false;  // tail mass stays heavy at the largest p
  bool stable_tails = false; // input long enough (>= 1e4) for trustworthy tails
};

// Tail-mass ratios of |eigs|^p with the second half of the index range as the
// tail; p* is the log-interpolated crossing of 0.05.
ThresholdReport schatten_threshold_report(std::span<const double> eigs,
                                          std::span<const double> p_grid);

struct RatioStats {
  double max = 0.0;
  double median = 0.0;
  double min = 0.0;
  double p_prime = 0.0;
  int samples = 0;
};

// Ratios ||E_W(G)||_{S^{p'}} / ||G||_{L^2(mu)} over random complex Gaussian G
// (normalized in L^2(mu) using |w_j|); a boundedness diagnostic, not a proof.
RatioStats bak_ratio_sampler(const DiscreteMeasure& mu, double p_prime, int n_samples,
                             std::uint64_t seed, const HermiteBasis& basis, int workers = 0);

struct CompactnessReport {
  std::vector<int> dims;
  std::vector<std::vector<double>> spectra;  // singular values per dim, descending
  std::vector<int> k05;          // first k with s_k < 0.05; -1 if none at that dim
  std::vector<double> head_drift;  // max rel change of leading values vs previous dim
  bool all_unit = false;           // every singular value equals 1 to 1e-9
  bool circle_fast_path = false;
  std::string verdict;  // "not compact" | "compact-consistent" | "inconclusive"
};

// Singular spectra of E_W(1, mu) across truncation dimensions. Circles use the
// closed-form spectrum (validated; sorted by magnitude); everything else goes
// through the generic extension quadrature.
CompactnessReport compactness_probe(const DiscreteMeasure& mu, std::span<const int> dims,
                                    int workers = 0);

}  // namespace qha
