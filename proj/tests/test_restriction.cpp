#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <vector>

#include "qha/hermite.hpp"
#include "qha/measures.hpp"
#include "qha/operators.hpp"
#include "qha/phase_space.hpp"
#include "qha/quantize.hpp"
#include "qha/restriction.hpp"
#include "qha/rng.hpp"
#include "qha/wavefunc.hpp"

using namespace qha;

namespace {

const HermiteBasis& basis64() {
  static const HermiteBasis b = hermite_basis_cached(64, default_line_grid(64));
  return b;
}

std::vector<cd> ones_for(const DiscreteMeasure& mu) {
  return std::vector<cd>(mu.size(), cd(1.0, 0.0));
}

}  // namespace

TEST_CASE("measure constructors and masses") {
  CHECK(make_dirac({0.0, 0.0}).size() == 1);
  const DiscreteMeasure c = make_circle(2.0, 32, 3.0);
  CHECK(c.size() == 32);
  CHECK(std::abs(c.total_mass() - cd(3.0, 0.0)) < 1e-12);
  CHECK(std::fabs(c.radius_bound - 2.0) < 1e-15);
  const DiscreteMeasure k = make_cantor(2);
  CHECK(k.size() == 16);
  CHECK(std::abs(k.total_mass() - cd(1.0, 0.0)) < 1e-14);
  CHECK(k.center.x == 0.0);
  const DiscreteMeasure two =
      make_atoms({{0.5, 0.0}, {-0.5, 0.0}}, {cd(1.0, 0.0), cd(1.0, 0.0)});
  CHECK(std::fabs(two.radius_bound - 0.5) < 1e-15);
  CHECK(std::fabs(two.total_variation() - 2.0) < 1e-15);
}

TEST_CASE("fourier of measures: dirac and circle Bessel profile") {
  const DiscreteMeasure d = make_dirac({0.0, 0.0});
  const std::vector<PhasePoint> pts{{0.0, 0.0}, {1.0, 2.0}, {-3.0, 0.4}};
  for (const cd v : fourier_of_measure(d, pts)) CHECK(std::abs(v - cd(1.0, 0.0)) < 1e-15);
  // discrete circles converge to the radial Bessel profile; 256 nodes already
  // match a 10x refinement to 1e-10 at moderate frequencies
  const std::vector<cd> coarse = fourier_of_measure(make_circle(1.0, 256, 1.0), pts);
  const std::vector<cd> fine = fourier_of_measure(make_circle(1.0, 2560, 1.0), pts);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(std::abs(coarse[i] - fine[i]) < 1e-10);
}

TEST_CASE("parseval pairing agrees across summation orders") {
  const DiscreteMeasure mu = make_circle(1.0, 24, 1.0);
  const DiscreteMeasure nu = make_cantor(1);
  const auto [lhs, rhs] = parseval_measures(mu, nu);
  CHECK(std::abs(lhs - rhs) < 1e-12);
}

TEST_CASE("measure json and csv round trips") {
  const DiscreteMeasure c =
      measure_from_json_text(R"({"kind":"circle","radius":1.5,"nodes":16,"mass":2.0})");
  CHECK(c.kind == MeasureKind::circle);
  CHECK(c.size() == 16);
  CHECK(std::abs(c.total_mass() - cd(2.0, 0.0)) < 1e-12);
  const std::string path = std::filesystem::temp_directory_path() / "qha_test_atoms.csv";
  write_atoms_csv(c, path);
  const DiscreteMeasure back = read_atoms_csv(path);
  REQUIRE(back.size() == c.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    CHECK(back.atoms[j].x == c.atoms[j].x);
    CHECK(back.weights[j] == c.weights[j]);
  }
  std::remove(path.c_str());
}

TEST_CASE("reweight applies the gaussian factor") {
  const DiscreteMeasure base = make_circle(1.0, 8, 1.0);
  const DiscreteMeasure r = reweight(base, {0.3, 0.0});
  for (std::size_t j = 0; j < base.size(); ++j) {
    const double d2 = abs2(base.atoms[j] - PhasePoint{0.3, 0.0});
    CHECK(std::abs(r.weights[j] - base.weights[j] * std::exp(-0.5 * PI * d2)) < 1e-15);
  }
}

TEST_CASE("dirac extension is the identity scaled by the density") {
  const DiscreteMeasure d = make_dirac({0.0, 0.0});
  const cd g0(2.0, 1.0);
  const OperatorMatrix e = extension_matrix(std::vector<cd>{g0}, d, 0.5, 8, 0);
  const OperatorMatrix want = op_scale(identity_op(8, 0), g0);
  CHECK(max_abs_entry(op_sub(e, want)) < 1e-15);
}

TEST_CASE("quantum_extension wraps extension_matrix with the basis label") {
  const DiscreteMeasure mu = make_circle(1.0, 16, 1.0);
  const std::vector<cd> g = ones_for(mu);
  const OperatorMatrix a = quantum_extension(g, mu, basis64());
  const OperatorMatrix b = extension_matrix(g, mu, 0.5, basis64().size, basis64().fingerprint());
  CHECK(a.basis_fp == b.basis_fp);
  CHECK(max_abs_entry(op_sub(a, b)) == 0.0);
  const OperatorMatrix c = quantum_extension_tau(g, mu, 0.5, basis64());
  CHECK(max_abs_entry(op_sub(a, c)) == 0.0);
}

TEST_CASE("extension operator norm bound") {
  const DiscreteMeasure mu = make_circle(1.0, 32, 1.0);
  Rng rng(3);
  std::vector<cd> g(mu.size());
  for (cd& v : g) v = cd(rng.next_normal(), rng.next_normal());
  double tv = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) tv += std::abs(mu.weights[j] * g[j]);
  const OperatorMatrix e = extension_matrix(g, mu, 0.5, 32, 0);
  CHECK(schatten_norm(e, std::numeric_limits<double>::infinity()) <= tv + 1e-9);
}

TEST_CASE("circle extensions are diagonal by rotation symmetry") {
  const DiscreteMeasure mu = make_circle(1.0, 64, 1.0);
  const OperatorMatrix e = extension_matrix(ones_for(mu), mu, 0.5, 32, 0);
  double diag = 0.0, off = 0.0;
  for (int m = 0; m < 32; ++m)
    for (int n = 0; n < 32; ++n) {
      const double v = std::abs(e.at(m, n));
      (m == n ? diag : off) = std::max(m == n ? diag : off, v);
    }
  CHECK(off < 1e-10 * diag);
}

TEST_CASE("circle spectrum closed form and validation gate") {
  const CircleSpectrum cs = circle_spectrum(1.0, 256, 1.0);
  CHECK(cs.closed_form_ok);
  CHECK(cs.validation_gap < 1e-8);
  // lambda_0 = e^{-pi/2}, lambda_1 = (1 - pi) e^{-pi/2}
  CHECK(std::fabs(cs.values[0] - 0.20787957635076193) < 1e-13);
  CHECK(std::fabs(cs.values[1] + 0.44519337354415023) < 1e-13);
  // magnitudes agree with the SVD of the quadrature extension
  const DiscreteMeasure mu = make_circle(1.0, 256, 1.0);
  const SingularSpectrum sv =
      singular_spectrum(extension_matrix(ones_for(mu), mu, 0.5, 64, 0));
  std::vector<double> mags(cs.values.begin(), cs.values.begin() + 64);
  for (double& v : mags) v = std::fabs(v);
  std::sort(mags.begin(), mags.end(), std::greater<double>());
  double worst = 0.0;
  for (int i = 0; i < 64; ++i) worst = std::max(worst, std::fabs(mags[i] - sv.values[i]));
  CHECK(worst < 1e-10);
  // mass scales the whole spectrum linearly
  const CircleSpectrum scaled = circle_spectrum(1.0, 8, 2.5);
  for (int i = 0; i < 8; ++i)
    CHECK(std::fabs(scaled.values[i] - 2.5 * cs.values[i]) < 1e-12);
}

TEST_CASE("envelope decay exponent on synthetic power laws") {
  std::vector<double> plain, wavy;
  for (int n = 0; n < 20000; ++n) {
    const double v = std::pow(n + 1.0, -0.25);
    plain.push_back(v);
    wavy.push_back(v * std::cos(n / 3.0));
  }
  CHECK(std::fabs(envelope_decay_exponent(plain, 100, 10000) + 0.25) < 1e-3);
  CHECK(std::fabs(envelope_decay_exponent(wavy, 100, 10000) + 0.25) < 0.02);
}

TEST_CASE("schatten threshold report on synthetic spectra") {
  std::vector<double> s;
  for (int n = 1; n <= 65536; ++n) s.push_back(std::pow(n, -0.5));
  std::vector<double> grid;
  for (double p = 1.5; p <= 3.0 + 1e-9; p += 0.05) grid.push_back(p);
  const ThresholdReport rep = schatten_threshold_report(s, grid);
  CHECK(rep.crossed);
  CHECK(rep.stable_tails);
  CHECK(rep.p_star > 1.9);
  CHECK(rep.p_star < 2.3);
  for (std::size_t i = 0; i + 1 < rep.tail_ratios.size(); ++i)
    CHECK(rep.tail_ratios[i + 1] < rep.tail_ratios[i]);
  // flat spectrum: tails never thin out
  const std::vector<double> flat(20000, 1.0);
  const ThresholdReport f = schatten_threshold_report(flat, grid);
  CHECK(f.not_compact);
  CHECK_FALSE(f.crossed);
  CHECK(std::isnan(f.p_star));
}

TEST_CASE("transfer identity on the two-atom measure") {
  const DiscreteMeasure two =
      make_atoms({{0.5, 0.0}, {-0.5, 0.0}}, {cd(1.0, 0.0), cd(1.0, 0.0)});
  const WaveFunction g = gaussian_ground(basis64().grid);
  const OperatorMatrix t = rank_one(g, g, basis64());
  const TransferReport rep =
      transfer_check_operator(t, two, basis64(), PhaseGrid{6.0, 144});
  CHECK(rep.pass);
  CHECK(rep.identity_error < 1e-10);
  // atoms sit exactly on the radius bound: achieved floor = e^{-pi R^2/2},
  // an exact tie with the theoretical floor up to quadrature rounding
  CHECK(std::fabs(rep.achieved_floor - std::exp(-PI / 8.0)) < 1e-12);
  CHECK(rep.achieved_floor >= rep.theoretical_floor - 1e-9);
}

TEST_CASE("transfer identity, function side") {
  const DiscreteMeasure two =
      make_atoms({{0.5, 0.0}, {-0.5, 0.0}}, {cd(1.0, 0.0), cd(1.0, 0.0)});
  const PhaseFunction f = sample_phase_function(PhaseGrid{5.0, 100}, [](PhasePoint z) {
    return cd(z.x, z.xi) * std::exp(-0.5 * PI * abs2(z)) + 0.2 * std::exp(-PI * abs2(z));
  });
  const TransferReport rep = transfer_check_function(f, two, basis64());
  CHECK(rep.pass);
  CHECK(rep.identity_error < 1e-8);
}

TEST_CASE("restriction/extension adjunction") {
  // identity operator against a dirac: both sides equal the dimension
  const DiscreteMeasure d = make_dirac({0.0, 0.0});
  const HermiteBasis b16 = hermite_basis_cached(16, default_line_grid(16));
  const auto [l1, r1] =
      adjoint_duality_check(std::vector<cd>{cd(1.0, 0.0)}, identity_op(16, b16.fingerprint()),
                            d, b16);
  CHECK(std::abs(l1 - cd(16.0, 0.0)) < 1e-12);
  CHECK(std::abs(l1 - r1) < 1e-12);
  // zero density kills both sides
  const auto [l0, r0] =
      adjoint_duality_check(std::vector<cd>{cd(0.0, 0.0)}, identity_op(16, b16.fingerprint()),
                            d, b16);
  CHECK(std::abs(l0) == 0.0);
  CHECK(std::abs(r0) == 0.0);
  // random density and operator over a circle
  const DiscreteMeasure mu = make_circle(1.0, 64, 1.0);
  const HermiteBasis b32 = hermite_basis_cached(32, default_line_grid(32));
  Rng rng(11);
  std::vector<cd> phi(mu.size());
  for (cd& v : phi) v = cd(rng.next_normal(), rng.next_normal());
  OperatorMatrix t = zero_operator(32, b32.fingerprint());
  for (cd& v : t.entries) v = cd(rng.next_normal(), rng.next_normal());
  const auto [lhs, rhs] = adjoint_duality_check(phi, t, mu, b32);
  CHECK(std::abs(lhs - rhs) / std::abs(lhs) < 1e-10);
}

TEST_CASE("bak ratios: dirac closed form") {
  const HermiteBasis b128 = hermite_basis_cached(128, default_line_grid(128));
  const RatioStats st = bak_ratio_sampler(make_dirac({0.0, 0.0}), 6.0, 3, 1, b128);
  const double want = std::pow(128.0, 1.0 / 6.0);
  CHECK(std::fabs(st.median - want) / want < 1e-12);
  CHECK(std::fabs(st.max - st.min) < 1e-12 * want);
  CHECK(st.samples == 3);
}

TEST_CASE("compactness probe verdicts") {
  const std::vector<int> dims{32, 64};
  const CompactnessReport d = compactness_probe(make_dirac({0.0, 0.0}), dims);
  CHECK(d.verdict == "not compact");
  CHECK(d.all_unit);
  CHECK(d.k05[0] == -1);
  CHECK(d.k05[1] == -1);
  // eigenvalue peaks stay above 0.05 out to n ~ 5.2e3, so the below-0.05
  // count only saturates (at 1928) once both truncation dims pass that point
  const std::vector<int> cdims{8192, 16384};
  const CompactnessReport c = compactness_probe(make_circle(1.0, 128, 1.0), cdims);
  CHECK(c.circle_fast_path);
  CHECK(c.verdict == "compact-consistent");
  CHECK(c.k05[0] == c.k05[1]);
  CHECK(c.k05[1] == 1928);
  for (std::size_t i = 1; i < c.spectra[1].size(); ++i)
    CHECK(c.spectra[1][i] <= c.spectra[1][i - 1] + 1e-15);
}

TEST_CASE("weyl quantization of the doubled gaussian is the ground projection") {
  const PhaseFunction a = sample_phase_function(
      PhaseGrid{4.0, 64}, [](PhasePoint z) { return cd(2.0 * std::exp(-2.0 * PI * abs2(z)), 0.0); });
  QuantizeDiag diag;
  const OperatorMatrix w = weyl_quantize(a, 16, basis64().fingerprint(), {}, &diag);
  CHECK(diag.boundary_ok);
  const WaveFunction g = gaussian_ground(basis64().grid);
  const OperatorMatrix p0 = rank_one(g, g, basis64());
  OperatorMatrix p16 = zero_operator(16, basis64().fingerprint());
  for (int m = 0; m < 16; ++m)
    for (int n = 0; n < 16; ++n) p16.entries[static_cast<std::size_t>(m) * 16 + n] = p0.at(m, n);
  CHECK(max_abs_entry(op_sub(w, p16)) < 1e-8);
}

TEST_CASE("tau = 1/2 quantization is bit-identical to the untwisted path") {
  const PhaseFunction a = sample_phase_function(PhaseGrid{4.0, 64}, [](PhasePoint z) {
    return cd(std::cos(1.1 * z.x), std::sin(0.7 * z.xi)) * std::exp(-PI * abs2(z));
  });
  const OperatorMatrix w = weyl_quantize(a, 32, 0);
  const OperatorMatrix t = tau_quantize(a, 0.5, 32, 0);
  REQUIRE(w.entries.size() == t.entries.size());
  for (std::size_t i = 0; i < w.entries.size(); ++i) CHECK(w.entries[i] == t.entries[i]);
}

TEST_CASE("localization with full symbol resolves the identity") {
  const PhaseFunction one =
      sample_phase_function(PhaseGrid{4.0, 64}, [](PhasePoint) { return cd(1.0, 0.0); });
  const WaveFunction g = gaussian_ground(basis64().grid);
  const OperatorMatrix l = localization(one, g, g, basis64());
  double worst = 0.0;
  for (int m = 0; m < 8; ++m)
    for (int n = 0; n < 8; ++n)
      worst = std::max(worst, std::abs(l.at(m, n) - cd(m == n ? 1.0 : 0.0, 0.0)));
  CHECK(worst < 1e-6);
}

TEST_CASE("node culling stays within its declared tolerance") {
  const PhaseFunction a = sample_phase_function(
      PhaseGrid{6.0, 144}, [](PhasePoint z) { return cd(std::exp(-PI * abs2(z)), 0.0); });
  QuantizeOptions loose;
  loose.cull_eps = 1e-6;
  QuantizeDiag dl, dt;
  const OperatorMatrix wl = weyl_quantize(a, 16, 0, loose, &dl);
  const OperatorMatrix wt = weyl_quantize(a, 16, 0, {}, &dt);
  CHECK(dl.nodes_used < dt.nodes_used);
  CHECK(dl.nodes_total == dt.nodes_total);
  CHECK(max_abs_entry(op_sub(wl, wt)) < 1e-5);
}

TEST_CASE("regularity estimates on the unit circle") {
  const DiscreteMeasure mu = make_circle(1.0, 4096, 1.0);
  const RegularityReport rep = regularity_estimates(mu, 64, 48, 12345);
  CHECK(rep.alpha_reliable);
  CHECK(rep.beta_reliable);
  CHECK(std::fabs(rep.alpha_hat - 1.0053) < 0.05);
  CHECK(std::fabs(rep.beta_hat - 1.0162) < 0.05);
}

TEST_CASE("regularity estimates on a cantor iterate stay finite") {
  const RegularityReport rep = regularity_estimates(make_cantor(3), 64, 48, 12345);
  CHECK(std::isfinite(rep.alpha_hat));
  CHECK(std::isfinite(rep.beta_hat));
  CHECK(rep.alpha_hat > 0.9);
  CHECK(rep.alpha_hat < 1.4);
}
