#include "qha/linalg.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <cblas.h>
#include <lapacke.h>

#include <algorithm>
#include <stdexcept>

namespace qha::linalg {

namespace {
// BLAS-internal threading is pinned to 1 so summation orders never depend on
// the machine; parallelism lives in the caller's worker loops instead.
const bool g_blas_single_thread = [] {
  openblas_set_num_threads(1);
  return true;
}();
}  // namespace

void matmul(const cd* a, bool conj_a, const cd* b, bool conj_b, cd* c, int n, int k, int m) {
  const cd one{1.0, 0.0}, zero{0.0, 0.0};
  cblas_zgemm(CblasRowMajor, conj_a ? CblasConjTrans : CblasNoTrans,
              conj_b ? CblasConjTrans : CblasNoTrans, n, m, k, &one, a,
              conj_a ? n : k, b, conj_b ? k : m, &zero, c, m);
}

void matmul_acc(const cd* a, bool conj_a, const cd* b, bool conj_b, cd alpha, cd* c, int n,
                int k, int m) {
  const cd one{1.0, 0.0};
  cblas_zgemm(CblasRowMajor, conj_a ? CblasConjTrans : CblasNoTrans,
              conj_b ? CblasConjTrans : CblasNoTrans, n, m, k, &alpha, a,
              conj_a ? n : k, b, conj_b ? k : m, &one, c, m);
}

void matvec(const cd* a, bool conj_trans, const cd* x, cd* y, int n, int m) {
  const cd one{1.0, 0.0}, zero{0.0, 0.0};
  cblas_zgemv(CblasRowMajor, conj_trans ? CblasConjTrans : CblasNoTrans, n, m, &one, a, m, x, 1,
              &zero, y, 1);
}

std::vector<double> singular_values(std::vector<cd> a, int n, int m) {
  std::vector<double> s(std::min(n, m));
  // u/vt are never referenced with jobz='N', but LAPACKE validates the leading
  // dimensions against the full output shapes regardless.
  cd dummy;
  int info = LAPACKE_zgesdd(LAPACK_ROW_MAJOR, 'N', n, m, a.data(), m, s.data(), &dummy,
                            std::max(1, std::min(n, m)), &dummy, std::max(1, m));
  if (info != 0) throw std::runtime_error("zgesdd failed, info=" + std::to_string(info));
  return s;  // zgesdd returns descending order
}

void svd_square(std::vector<cd> a, int n, std::vector<cd>& u, std::vector<double>& s,
                std::vector<cd>& vt) {
  u.assign(static_cast<std::size_t>(n) * n, cd{});
  vt.assign(static_cast<std::size_t>(n) * n, cd{});
  s.assign(n, 0.0);
  int info = LAPACKE_zgesdd(LAPACK_ROW_MAJOR, 'A', n, n, a.data(), n, s.data(), u.data(), n,
                            vt.data(), n);
  if (info != 0) throw std::runtime_error("zgesdd failed, info=" + std::to_string(info));
}

std::vector<double> hermitian_eigenvalues(std::vector<cd> a, int n) {
  std::vector<double> w(n);
  int info = LAPACKE_zheevd(LAPACK_ROW_MAJOR, 'N', 'U', n, a.data(), n, w.data());
  if (info != 0) throw std::runtime_error("zheevd failed, info=" + std::to_string(info));
  return w;  // ascending
}

void gram_real(const double* a, int n, int m, double scale, double* c) {
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, n, n, m, scale, a, m, a, m, 0.0, c, n);
}

}  // namespace qha::linalg
