#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qha/grids.hpp"

namespace qha {

enum class MeasureKind { dirac, atom_list, circle, cantor, reweighted };

const char* measure_kind_name(MeasureKind k);

// Finite list of weighted atoms in phase space; quadrature surrogate for
// compactly supported measures. Invariant: every atom lies in the closed
// ball B(center, radius_bound).
struct DiscreteMeasure {
  MeasureKind kind = MeasureKind::atom_list;
  std::vector<PhasePoint> atoms;
  std::vector<cd> weights;
  PhasePoint center{0.0, 0.0};
  double radius_bound = 0.0;

  std::size_t size() const { return atoms.size(); }
  cd total_mass() const;
  double total_variation() const;  // sum of |w_j|
};

DiscreteMeasure make_dirac(PhasePoint z0);
DiscreteMeasure make_atoms(std::vector<PhasePoint> atoms, std::vector<cd> weights);
// Equispaced angular nodes, equal weights mass/nodes (trapezoid rule).
DiscreteMeasure make_circle(double radius, int nodes, double mass = 1.0);
// Per-axis product of level-k middle-thirds iterates (interval midpoints),
// centered at the origin: 4^k atoms of weight 4^{-k}.
DiscreteMeasure make_cantor(int level);
// w_j <- w_j * exp(-pi |z_j - z0|^2 / 2); atoms unchanged.
DiscreteMeasure reweight(const DiscreteMeasure& base, PhasePoint z0);

// Evaluates zeta -> sum_j w_j exp(-2 pi i sigma(zeta, z_j)) at each target.
// Per-target sums are pairwise-folded in fixed atom order, so results do not
// depend on the worker count.
std::vector<cd> fourier_of_measure(const DiscreteMeasure& mu,
                                   std::span<const PhasePoint> targets, int workers = 0);

// Both sides of <Fourier(mu), nu> = <mu, Fourier(nu)>, computed by independent
// summation orders (left: outer loop over nu atoms; right: over mu atoms).
std::pair<cd, cd> parseval_measures(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct RegularityOptions {
  double radius_lo_factor = 1.0 / 64.0;  // fit radii in [lo, hi] * radius_bound
  double radius_hi_factor = 1.0 / 2.0;
  double freq_lo = 4.0;  // fit |zeta| range for the decay exponent
  double freq_hi = 256.0;
  int moduli_per_bin = 8;
  int max_centers = 256;
};

struct RegularityReport {
  double alpha_hat = 0.0;  // ball-mass scaling exponent
  double beta_hat = 0.0;   // Fourier decay exponent (beta = -2 * fit slope)
  bool alpha_reliable = false;
  bool beta_reliable = false;
  int alpha_scales_used = 0;
};

// Diagnostic exponent fits, not certified values. alpha_hat: least-squares
// slope of log mass(B(z_j, r)) vs log r averaged over atom-centered balls,
// restricted to radii whose mean ball occupancy is informative. beta_hat:
// -2 x slope of log (sup over jittered rays and moduli within each dyadic
// |zeta| bin of |Fourier(mu)|) vs log(1 + |zeta|); binning rides over the
// zeros of oscillatory transforms.
RegularityReport regularity_estimates(const DiscreteMeasure& mu, int ray_count,
                                      int radius_samples, std::uint64_t seed,
                                      int workers = 0, const RegularityOptions& opt = {});

// JSON measure descriptions, e.g. {"kind":"circle","radius":1.0,"nodes":256,"mass":1.0}.
DiscreteMeasure measure_from_json_text(const std::string& text);

// CSV with header x,xi,re_w,im_w; %.17g round-trips doubles exactly.
void write_atoms_csv(const DiscreteMeasure& mu, const std::string& path);
DiscreteMeasure read_atoms_csv(const std::string& path);

}  // namespace qha
