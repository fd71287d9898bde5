#include "qha/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "qha/linalg.hpp"
#include "qha/parallel.hpp"

namespace qha {

namespace {

// Surviving term indices after dropping the smallest-|coef| prefix whose l1
// mass stays within eps * total; returned ascending so the summation order is
// a pure function of the coefficients.
std::vector<std::size_t> cull_nodes(const std::vector<cd>& coefs, double eps) {
  const std::size_t n = coefs.size();
  std::vector<double> mag(n);
  for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(coefs[i]);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return mag[i] != mag[j] ? mag[i] < mag[j] : i < j;
  });
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += mag[order[i]];
  const double budget = eps * total;
  double cum = 0.0;
  std::size_t cut = 0;
  while (cut < n && cum + mag[order[cut]] <= budget) cum += mag[order[cut++]];
  std::vector<std::size_t> kept(order.begin() + cut, order.end());
  std::sort(kept.begin(), kept.end());
  return kept;
}

PhasePoint grid_node(const PhaseGrid& g, std::size_t idx) {
  const int m = g.points;
  return {g.node1(static_cast<int>(idx / m)), g.node1(static_cast<int>(idx % m))};
}

}  // namespace

OperatorMatrix conv_fun_op(const PhaseFunction& a, const OperatorMatrix& s,
                           const QuantizeOptions& opt, QuantizeDiag* diag) {
  a.grid.validate();
  if (s.dim < 1) throw std::invalid_argument("conv_fun_op: empty operator");
  const int dim = s.dim;
  const double w = a.grid.spacing() * a.grid.spacing();

  std::vector<cd> coefs(a.values.size());
  for (std::size_t i = 0; i < coefs.size(); ++i) coefs[i] = w * a.values[i];
  const std::vector<std::size_t> kept = cull_nodes(coefs, opt.cull_eps);

  QuantizeDiag d;
  d.boundary_linf = boundary_max(a);
  d.boundary_ok = d.boundary_linf < opt.boundary_tol;
  d.nodes_total = coefs.size();
  d.nodes_used = kept.size();

  std::vector<cd> u, vt;
  std::vector<double> sv;
  linalg::svd_square(s.entries, dim, u, sv, vt);
  int rank = 0;
  if (sv[0] > 0.0)
    for (double v : sv)
      if (v > sv[0] * 1e-14) ++rank;

  OperatorMatrix out = zero_operator(dim, s.basis_fp);
  if (rank == 0 || kept.empty()) {
    d.rank_used = rank;
    if (diag) *diag = d;
    return out;
  }

  const std::size_t len = static_cast<std::size_t>(dim) * dim;
  if (4 * rank <= dim) {
    // S = sum_i sv_i u_i v_i^*; rho S rho(-z) = sum_i sv_i (rho u_i)(rho v_i)^*.
    d.rank_used = rank;
    const int r = rank;
    std::vector<cd> basis_cols(static_cast<std::size_t>(dim) * 2 * r);
    for (int n = 0; n < dim; ++n)
      for (int i = 0; i < r; ++i) {
        basis_cols[static_cast<std::size_t>(n) * 2 * r + i] =
            u[static_cast<std::size_t>(n) * dim + i];
        basis_cols[static_cast<std::size_t>(n) * 2 * r + r + i] =
            std::conj(vt[static_cast<std::size_t>(i) * dim + n]);
      }
    accumulate_terms(
        kept.size(), len, opt.workers,
        [&](std::size_t k, cd* partial) {
          thread_local std::vector<cd> rho, img, left, right;
          rho.resize(len);
          img.resize(static_cast<std::size_t>(dim) * 2 * r);
          left.resize(static_cast<std::size_t>(dim) * r);
          right.resize(static_cast<std::size_t>(dim) * r);
          const std::size_t idx = kept[k];
          rho_fill(grid_node(a.grid, idx), dim, rho.data());
          linalg::matmul(rho.data(), false, basis_cols.data(), false, img.data(), dim, dim,
                         2 * r);
          const cd coef = coefs[idx];
          for (int n = 0; n < dim; ++n)
            for (int i = 0; i < r; ++i) {
              left[static_cast<std::size_t>(n) * r + i] =
                  img[static_cast<std::size_t>(n) * 2 * r + i] * (coef * sv[i]);
              right[static_cast<std::size_t>(n) * r + i] =
                  img[static_cast<std::size_t>(n) * 2 * r + r + i];
            }
          linalg::matmul_acc(left.data(), false, right.data(), true, cd(1.0, 0.0), partial, dim,
                             r, dim);
        },
        out.entries.data());
  } else {
    d.rank_used = -1;
    accumulate_terms(
        kept.size(), len, opt.workers,
        [&](std::size_t k, cd* partial) {
          thread_local std::vector<cd> rho, m1;
          rho.resize(len);
          m1.resize(len);
          const std::size_t idx = kept[k];
          rho_fill(grid_node(a.grid, idx), dim, rho.data());
          linalg::matmul(rho.data(), false, s.entries.data(), false, m1.data(), dim, dim, dim);
          // rho(-z) = rho(z)^*, supplied as the conjugate-transposed right factor
          linalg::matmul_acc(m1.data(), false, rho.data(), true, coefs[idx], partial, dim, dim,
                             dim);
        },
        out.entries.data());
  }
  if (diag) *diag = d;
  return out;
}

OperatorMatrix tau_quantize(const PhaseFunction& a, double tau, int dim, std::uint64_t basis_fp,
                            const QuantizeOptions& opt, QuantizeDiag* diag) {
  if (!(tau >= 0.0 && tau <= 1.0))
    throw std::invalid_argument("tau_quantize: tau must lie in [0, 1]");
  if (dim < 1) throw std::invalid_argument("tau_quantize: dim must be >= 1");
  a.grid.validate();

  QuantizeDiag d;
  d.boundary_linf = boundary_max(a);
  d.boundary_ok = d.boundary_linf < opt.boundary_tol;

  const PhaseFunction f = symplectic_fourier(a, opt.workers);
  const double w = f.grid.spacing() * f.grid.spacing();
  const double tf = 2.0 * tau - 1.0;
  std::vector<cd> coefs(f.values.size());
  for (std::size_t i = 0; i < coefs.size(); ++i) {
    cd c = w * f.values[i];
    if (tf != 0.0) {
      const PhasePoint z = grid_node(f.grid, i);
      const double ph = -PI * tf * z.x * z.xi;
      c *= cd(std::cos(ph), std::sin(ph));
    }
    coefs[i] = c;
  }
  const std::vector<std::size_t> kept = cull_nodes(coefs, opt.cull_eps);
  d.nodes_total = coefs.size();
  d.nodes_used = kept.size();

  OperatorMatrix out = zero_operator(dim, basis_fp);
  accumulate_terms(
      kept.size(), out.entries.size(), opt.workers,
      [&](std::size_t k, cd* partial) {
        const std::size_t idx = kept[k];
        add_scaled_rho(grid_node(f.grid, idx), dim, coefs[idx], partial);
      },
      out.entries.data());
  if (diag) *diag = d;
  return out;
}

OperatorMatrix weyl_quantize(const PhaseFunction& a, int dim, std::uint64_t basis_fp,
                             const QuantizeOptions& opt, QuantizeDiag* diag) {
  return tau_quantize(a, 0.5, dim, basis_fp, opt, diag);
}

OperatorMatrix localization(const PhaseFunction& a, const WaveFunction& phi,
                            const WaveFunction& psi, const HermiteBasis& basis,
                            const QuantizeOptions& opt, QuantizeDiag* diag) {
  return conv_fun_op(a, rank_one(psi, phi, basis, opt.workers), opt, diag);
}

}  // namespace qha
