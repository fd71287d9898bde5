#pragma once

#include <complex>
#include <vector>

namespace qha::linalg {

using cd = std::complex<double>;

// c = op(a) * op(b); row-major, op = identity or conjugate transpose.
// a is n x k (k x n if conj_a), b is k x m (m x k if conj_b), c is n x m.
void matmul(const cd* a, bool conj_a, const cd* b, bool conj_b, cd* c, int n, int k, int m);

// c += alpha * op(a) * op(b); same layout rules as matmul.
void matmul_acc(const cd* a, bool conj_a, const cd* b, bool conj_b, cd alpha, cd* c, int n,
                int k, int m);

// y = op(a) * x with a row-major n x m.
void matvec(const cd* a, bool conj_trans, const cd* x, cd* y, int n, int m);

// Singular values of a row-major n x m matrix, descending. Destroys the copy.
std::vector<double> singular_values(std::vector<cd> a, int n, int m);

// Full factorization a = u diag(s) vt of a square row-major n x n matrix;
// u and vt come back row-major n x n, s descending. Destroys the copy.
void svd_square(std::vector<cd> a, int n, std::vector<cd>& u, std::vector<double>& s,
                std::vector<cd>& vt);

// Eigenvalues of a Hermitian row-major n x n matrix, ascending.
std::vector<double> hermitian_eigenvalues(std::vector<cd> a, int n);

// Real n x n Gram-style product c = a * a^T * scale for row-major a (n x m).
void gram_real(const double* a, int n, int m, double scale, double* c);

}  // namespace qha::linalg
