#include "qha/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "qha/linalg.hpp"
#include "qha/parallel.hpp"

namespace qha {

namespace {

constexpr std::uint64_t kBlobVersion = 1;

void check_compatible(const OperatorMatrix& a, const OperatorMatrix& b, const char* who) {
  if (a.dim != b.dim) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  if (a.basis_fp != b.basis_fp)
    throw std::invalid_argument(std::string(who) + ": operators built from different bases");
}

}  // namespace

// out = rho(z) for the leading dim x dim Hermite block, diagonal by diagonal.
void rho_fill(PhasePoint z, int dim, cd* out) {
  std::fill(out, out + static_cast<std::size_t>(dim) * dim, cd(0.0, 0.0));
  const double r2 = abs2(z);
  if (r2 == 0.0) {
    for (int n = 0; n < dim; ++n) out[static_cast<std::size_t>(n) * dim + n] = cd(1.0, 0.0);
    return;
  }
  const double r = std::sqrt(r2);
  const double x_arg = PI * r2;
  const cd pstep(z.x / r, z.xi / r);  // w / |w|
  cd pw(1.0, 0.0);
  thread_local std::vector<double> lag;
  lag.resize(dim);
  for (int k = 0; k < dim; ++k) {
    scaled_laguerre_into(k, dim - 1 - k, x_arg, lag.data());
    const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    const cd up = sgn * std::conj(pw);
    for (int n = 0; n + k < dim; ++n) {
      out[static_cast<std::size_t>(n + k) * dim + n] = pw * lag[n];
      if (k > 0) out[static_cast<std::size_t>(n) * dim + (n + k)] = up * lag[n];
    }
    pw *= pstep;
  }
}

OperatorMatrix zero_operator(int dim, std::uint64_t basis_fp) {
  if (dim < 1) throw std::invalid_argument("zero_operator: dim must be >= 1");
  return {dim, std::vector<cd>(static_cast<std::size_t>(dim) * dim), basis_fp};
}

OperatorMatrix identity_op(int dim, std::uint64_t basis_fp) {
  OperatorMatrix a = zero_operator(dim, basis_fp);
  for (int n = 0; n < dim; ++n) a.at(n, n) = cd(1.0, 0.0);
  return a;
}

OperatorMatrix parity_op(int dim, std::uint64_t basis_fp) {
  OperatorMatrix a = zero_operator(dim, basis_fp);
  for (int n = 0; n < dim; ++n) a.at(n, n) = cd((n % 2 == 0) ? 1.0 : -1.0, 0.0);
  return a;
}

std::vector<cd> coefficients(const WaveFunction& f, const HermiteBasis& basis, int workers) {
  if (!f.grid.same_as(basis.grid))
    throw std::invalid_argument("coefficients: wave and basis grids differ");
  const int n = basis.size;
  const int mt = basis.grid.points;
  const double dt = basis.grid.spacing();
  std::vector<cd> c(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const double* h = basis.row(static_cast<int>(i));
    std::vector<cd> terms(mt);
    for (int j = 0; j < mt; ++j) terms[j] = f.values[j] * h[j];
    c[i] = dt * pairwise_sum(std::span<const cd>(terms));
  });
  return c;
}

OperatorMatrix rank_one(const WaveFunction& f, const WaveFunction& g, const HermiteBasis& basis,
                        int workers) {
  const std::vector<cd> cf = coefficients(f, basis, workers);
  const std::vector<cd> cg = coefficients(g, basis, workers);
  OperatorMatrix a = zero_operator(basis.size, basis.fingerprint());
  for (int m = 0; m < a.dim; ++m)
    for (int n = 0; n < a.dim; ++n) a.at(m, n) = cf[m] * std::conj(cg[n]);
  return a;
}

OperatorMatrix rho_matrix(PhasePoint z, const HermiteBasis& basis) {
  OperatorMatrix a = zero_operator(basis.size, basis.fingerprint());
  rho_fill(z, a.dim, a.entries.data());
  return a;
}

void add_scaled_rho(PhasePoint z, int dim, cd coef, cd* inout) {
  const cd* cp = &coef;
  cd* outs[1] = {inout};
  add_scaled_rho_multi(z, dim, std::span<const cd>(cp, 1), outs);
}

void add_scaled_rho_multi(PhasePoint z, int dim, std::span<const cd> coefs, cd* const* outs) {
  const std::size_t nc = coefs.size();
  const double r2 = abs2(z);
  if (r2 == 0.0) {
    for (std::size_t i = 0; i < nc; ++i)
      for (int n = 0; n < dim; ++n) outs[i][static_cast<std::size_t>(n) * dim + n] += coefs[i];
    return;
  }
  const double r = std::sqrt(r2);
  const double x_arg = PI * r2;
  const cd pstep(z.x / r, z.xi / r);
  cd pw(1.0, 0.0);
  thread_local std::vector<double> lag;
  lag.resize(dim);
  for (int k = 0; k < dim; ++k) {
    scaled_laguerre_into(k, dim - 1 - k, x_arg, lag.data());
    const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < nc; ++i) {
      const cd lo = coefs[i] * pw;
      const cd up = coefs[i] * (sgn * std::conj(pw));
      cd* o = outs[i];
      for (int n = 0; n + k < dim; ++n) {
        o[static_cast<std::size_t>(n + k) * dim + n] += lo * lag[n];
        if (k > 0) o[static_cast<std::size_t>(n) * dim + (n + k)] += up * lag[n];
      }
    }
    pw *= pstep;
  }
}

cd trace(const OperatorMatrix& a) {
  std::vector<cd> d(a.dim);
  for (int n = 0; n < a.dim; ++n) d[n] = a.at(n, n);
  return pairwise_sum(std::span<const cd>(d));
}

double hs_norm(const OperatorMatrix& a) {
  std::vector<double> t(a.entries.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::norm(a.entries[i]);
  return std::sqrt(pairwise_sum(std::span<const double>(t)));
}

double max_abs_entry(const OperatorMatrix& a) {
  double m = 0.0;
  for (const cd& v : a.entries) m = std::max(m, std::abs(v));
  return m;
}

OperatorMatrix multiply(const OperatorMatrix& a, const OperatorMatrix& b) {
  check_compatible(a, b, "multiply");
  OperatorMatrix c = zero_operator(a.dim, a.basis_fp);
  linalg::matmul(a.entries.data(), false, b.entries.data(), false, c.entries.data(), a.dim,
                 a.dim, a.dim);
  return c;
}

OperatorMatrix adjoint(const OperatorMatrix& a) {
  OperatorMatrix c = zero_operator(a.dim, a.basis_fp);
  for (int m = 0; m < a.dim; ++m)
    for (int n = 0; n < a.dim; ++n) c.at(m, n) = std::conj(a.at(n, m));
  return c;
}

OperatorMatrix op_add(const OperatorMatrix& a, const OperatorMatrix& b) {
  check_compatible(a, b, "op_add");
  OperatorMatrix c = a;
  for (std::size_t i = 0; i < c.entries.size(); ++i) c.entries[i] += b.entries[i];
  return c;
}

OperatorMatrix op_sub(const OperatorMatrix& a, const OperatorMatrix& b) {
  check_compatible(a, b, "op_sub");
  OperatorMatrix c = a;
  for (std::size_t i = 0; i < c.entries.size(); ++i) c.entries[i] -= b.entries[i];
  return c;
}

OperatorMatrix op_scale(const OperatorMatrix& a, cd c) {
  OperatorMatrix r = a;
  for (auto& v : r.entries) v *= c;
  return r;
}

SingularSpectrum singular_spectrum(const OperatorMatrix& a) {
  double dev = 0.0, tot = 0.0;
  for (int m = 0; m < a.dim; ++m)
    for (int n = 0; n < a.dim; ++n) {
      dev += std::norm(a.at(m, n) - std::conj(a.at(n, m)));
      tot += std::norm(a.at(m, n));
    }
  SingularSpectrum s;
  s.dim = a.dim;
  if (tot == 0.0) {
    s.values.assign(a.dim, 0.0);
    return s;
  }
  if (std::sqrt(dev) <= 1e-12 * std::sqrt(tot)) {
    s.values = linalg::hermitian_eigenvalues(a.entries, a.dim);
    for (double& v : s.values) v = std::fabs(v);
    std::sort(s.values.begin(), s.values.end(), std::greater<double>());
  } else {
    s.values = linalg::singular_values(a.entries, a.dim, a.dim);
  }
  return s;
}

double schatten_from_values(std::span<const double> s, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : s) m = std::max(m, v);
    return m;
  }
  if (!(p >= 1.0)) throw std::invalid_argument("schatten norm: p must be >= 1 or infinity");
  double acc = 0.0;
  for (std::size_t i = s.size(); i-- > 0;) acc += std::pow(s[i], p);  // smallest first
  return std::pow(acc, 1.0 / p);
}

double schatten_norm(const OperatorMatrix& a, double p) {
  if (!std::isinf(p) && !(p >= 1.0))
    throw std::invalid_argument("schatten_norm: p must be >= 1 or infinity");
  const SingularSpectrum s = singular_spectrum(a);
  return schatten_from_values(s.values, p);
}

std::vector<cd> fourier_wigner(const OperatorMatrix& t, std::span<const PhasePoint> targets,
                               int workers) {
  const int dim = t.dim;
  std::vector<cd> out(targets.size());
  parallel_for(targets.size(), workers, [&](std::size_t i) {
    const PhasePoint z = targets[i];
    const double r2 = abs2(z);
    if (r2 == 0.0) {
      out[i] = trace(t);
      return;
    }
    // Walk the diagonals of rho(-z); one Laguerre column per offset.
    const double r = std::sqrt(r2);
    const double x_arg = PI * r2;
    const cd pstep(-z.x / r, -z.xi / r);
    cd pw(1.0, 0.0);
    cd acc(0.0, 0.0);
    thread_local std::vector<double> lag;
    lag.resize(dim);
    for (int k = 0; k < dim; ++k) {
      scaled_laguerre_into(k, dim - 1 - k, x_arg, lag.data());
      const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
      const cd up = sgn * std::conj(pw);
      cd slo(0.0, 0.0), sup(0.0, 0.0);
      for (int n = 0; n + k < dim; ++n) {
        slo += t.at(n, n + k) * lag[n];
        if (k > 0) sup += t.at(n + k, n) * lag[n];
      }
      acc += pw * slo + up * sup;
      pw *= pstep;
    }
    out[i] = acc;
  });
  return out;
}

PhaseFunction fourier_wigner_grid(const OperatorMatrix& t, const HermiteBasis& basis,
                                  const PhaseGrid& grid, int workers) {
  if (t.basis_fp != basis.fingerprint())
    throw std::invalid_argument("fourier_wigner_grid: operator built from a different basis");
  if (t.dim > basis.size)
    throw std::invalid_argument("fourier_wigner_grid: operator larger than basis");
  grid.validate();
  if (grid.half_width > basis.grid.half_width)
    throw std::invalid_argument("fourier_wigner_grid: phase grid wider than the wave grid");
  const int m = grid.points;
  const int mt = basis.grid.points;
  const double q_real = grid.spacing() / (2.0 * basis.grid.spacing());
  const long long q = std::llround(q_real);
  if (std::fabs(q_real - q) > 1e-9 || q < 1)
    throw std::invalid_argument(
        "fourier_wigner_grid: phase grid misaligned with the sample lattice "
        "(needs h = 2 q dt for integer q >= 1)");

  // K = H^T T conj(H): the integral kernel of T on the sample lattice.
  const int dim = t.dim;
  std::vector<cd> hc(static_cast<std::size_t>(dim) * mt);
  for (int n = 0; n < dim; ++n) {
    const double* row = basis.row(n);
    for (int j = 0; j < mt; ++j) hc[static_cast<std::size_t>(n) * mt + j] = cd(row[j], 0.0);
  }
  std::vector<cd> tmp(static_cast<std::size_t>(dim) * mt);
  linalg::matmul(t.entries.data(), false, hc.data(), false, tmp.data(), dim, dim, mt);
  std::vector<cd> kernel(static_cast<std::size_t>(mt) * mt);
  linalg::matmul(hc.data(), true, tmp.data(), false, kernel.data(), mt, dim, mt);

  // Row ix holds the slice K(t_j + x/2, t_j - x/2) = K[j + s][j - s], s = q * (ix - M/2).
  std::vector<cd> rows(static_cast<std::size_t>(m) * mt, cd(0.0, 0.0));
  parallel_for(m, workers, [&](std::size_t ix) {
    const long long s = q * (static_cast<long long>(ix) - m / 2);
    cd* row = rows.data() + ix * mt;
    const long long jlo = std::max(0ll, -s), jhi = std::min<long long>(mt, mt - s);
    for (long long j = std::max(jlo, s); j < std::min<long long>(jhi, mt + s); ++j)
      row[j] = kernel[static_cast<std::size_t>(j + s) * mt + (j - s)];
  });

  return xi_quadrature_rows(rows, basis.grid, grid, workers);
}

std::vector<cd> conv_op_op(const OperatorMatrix& s, const OperatorMatrix& t,
                           std::span<const PhasePoint> targets, int workers) {
  check_compatible(s, t, "conv_op_op");
  const int dim = s.dim;
  // P T P flips the sign of entries with odd m+n.
  std::vector<cd> ptp(t.entries);
  for (int m = 0; m < dim; ++m)
    for (int n = 0; n < dim; ++n)
      if ((m + n) % 2 != 0) ptp[static_cast<std::size_t>(m) * dim + n] = -ptp[static_cast<std::size_t>(m) * dim + n];

  std::vector<cd> out(targets.size());
  parallel_for(targets.size(), workers, [&](std::size_t i) {
    std::vector<cd> rho(static_cast<std::size_t>(dim) * dim);
    std::vector<cd> m1(static_cast<std::size_t>(dim) * dim);
    std::vector<cd> m2(static_cast<std::size_t>(dim) * dim);
    rho_fill(targets[i], dim, rho.data());
    linalg::matmul(rho.data(), false, ptp.data(), false, m1.data(), dim, dim, dim);
    // rho(-z) = rho(z)^*, so the right factor is the conjugate transpose.
    linalg::matmul(m1.data(), false, rho.data(), true, m2.data(), dim, dim, dim);
    cd acc(0.0, 0.0);
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b)
        acc += s.entries[static_cast<std::size_t>(a) * dim + b] *
               m2[static_cast<std::size_t>(b) * dim + a];
    out[i] = acc;
  });
  return out;
}

PhaseFunction conv_op_op_grid(const OperatorMatrix& s, const OperatorMatrix& t,
                              const HermiteBasis& basis, const PhaseGrid& grid, int workers) {
  check_compatible(s, t, "conv_op_op_grid");
  const PhaseGrid dual = grid.dual();
  PhaseFunction fs = fourier_wigner_grid(s, basis, dual, workers);
  const PhaseFunction ft = fourier_wigner_grid(t, basis, dual, workers);
  for (std::size_t i = 0; i < fs.values.size(); ++i) fs.values[i] *= ft.values[i];
  PhaseFunction out = symplectic_fourier(fs, workers);
  if (!out.grid.same_as(grid))
    throw std::logic_error("conv_op_op_grid: double dual did not return to the input grid");
  out.grid = grid;
  return out;
}

PhaseFunction conv_rank_one_grid(const WaveFunction& f, const WaveFunction& g,
                                 const WaveFunction& u, const WaveFunction& v,
                                 const PhaseGrid& grid, int workers) {
  const PhaseFunction a1 = ambiguity_grid(g, parity_wave(u), grid, workers);
  const PhaseFunction a2 = ambiguity_grid(f, parity_wave(v), grid, workers);
  PhaseFunction out = a2;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] *= std::conj(a1.values[i]);
  return out;
}

WaveFunction parity_wave(const WaveFunction& u) {
  const int mt = u.grid.points;
  WaveFunction r{u.grid, std::vector<cd>(mt)};
  // Periodic reflection j -> (-j) mod M_t, the same convention a double
  // Fourier transform realizes; node 0 is its own mirror.
  r.values[0] = u.values[0];
  for (int j = 1; j < mt; ++j) r.values[j] = u.values[mt - j];
  return r;
}

void write_operator_blob(const OperatorMatrix& a, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("write_operator_blob: cannot open " + path);
  const char magic[8] = {'Q', 'H', 'A', 'O', 'P', 'E', 'R', '\0'};
  const std::uint64_t ver = kBlobVersion, dim = a.dim, fp = a.basis_fp;
  const std::size_t bytes = a.entries.size() * sizeof(cd);
  const std::uint64_t sum = fnv1a64(a.entries.data(), bytes);
  bool ok = std::fwrite(magic, 8, 1, f) == 1 && std::fwrite(&ver, 8, 1, f) == 1 &&
            std::fwrite(&dim, 8, 1, f) == 1 && std::fwrite(&fp, 8, 1, f) == 1 &&
            std::fwrite(a.entries.data(), 1, bytes, f) == bytes &&
            std::fwrite(&sum, 8, 1, f) == 1;
  std::fclose(f);
  if (!ok) throw std::runtime_error("write_operator_blob: short write to " + path);
}

OperatorMatrix read_operator_blob(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("read_operator_blob: cannot open " + path);
  char magic[8];
  std::uint64_t ver = 0, dim = 0, fp = 0, sum = 0;
  OperatorMatrix a;
  bool ok = std::fread(magic, 8, 1, f) == 1 && std::memcmp(magic, "QHAOPER", 8) == 0 &&
            std::fread(&ver, 8, 1, f) == 1 && ver == kBlobVersion &&
            std::fread(&dim, 8, 1, f) == 1 && dim >= 1 && dim <= 1u << 16 &&
            std::fread(&fp, 8, 1, f) == 1;
  if (ok) {
    a.dim = static_cast<int>(dim);
    a.basis_fp = fp;
    a.entries.resize(dim * dim);
    const std::size_t bytes = a.entries.size() * sizeof(cd);
    ok = std::fread(a.entries.data(), 1, bytes, f) == bytes && std::fread(&sum, 8, 1, f) == 1 &&
         sum == fnv1a64(a.entries.data(), bytes);
  }
  std::fclose(f);
  if (!ok) throw std::runtime_error("read_operator_blob: corrupt or incompatible file " + path);
  return a;
}

void write_operator_csv(const OperatorMatrix& a, const std::string& path) {
  if (a.dim > 128)
    throw std::invalid_argument("write_operator_csv: CSV export is for small operators (dim <= 128)");
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_operator_csv: cannot open " + path);
  std::fprintf(f, "m,n,re,im\n");
  for (int m = 0; m < a.dim; ++m)
    for (int n = 0; n < a.dim; ++n)
      std::fprintf(f, "%d,%d,%.17g,%.17g\n", m, n, a.at(m, n).real(), a.at(m, n).imag());
  std::fclose(f);
}

void write_spectrum_csv(const SingularSpectrum& s, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_spectrum_csv: cannot open " + path);
  std::fprintf(f, "n,s_n\n");
  for (std::size_t n = 0; n < s.values.size(); ++n)
    std::fprintf(f, "%zu,%.17g\n", n, s.values[n]);
  std::fclose(f);
}

}  // namespace qha
