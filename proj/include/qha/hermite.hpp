#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qha/grids.hpp"

namespace qha {

// Sampled orthonormal Hermite family in the 2pi convention:
// h_0(t) = 2^{1/4} exp(-pi t^2), transform eigenvalue (-i)^n.
// Immutable after construction; shareable across workers.
struct HermiteBasis {
  int size = 0;  // N
  LineGrid grid;
  std::vector<double> table;  // N x M_t row-major; row n holds h_n at the nodes

  const double* row(int n) const { return table.data() + static_cast<std::size_t>(n) * grid.points; }
  std::uint64_t fingerprint() const;
};

// T >= sqrt(N/pi) + 2 and M_t >= 8*ceil(T^2): the top function's support fits
// with margin and the quadrature resolves its oscillation.
bool hermite_sizing_ok(int N, const LineGrid& grid);
LineGrid minimal_line_grid(int N);
// Smallest grid that both satisfies the sizing rule and keeps T a multiple of 8,
// M_t = 8 T^2, so phase grids with L = 8, M = 4 L^2 align with the sample lattice.
LineGrid default_line_grid(int N);

HermiteBasis hermite_basis(int N, const LineGrid& grid, int workers = 0);
// Same result, but consults the binary cache under QHA_CACHE_DIR when set.
// Hits are bit-identical to recomputation (checksummed, keyed by N, T, M_t, version).
HermiteBasis hermite_basis_cached(int N, const LineGrid& grid, int workers = 0);

bool save_basis_cache(const HermiteBasis& basis, const std::string& path);
bool try_load_basis_cache(int N, const LineGrid& grid, const std::string& path, HermiteBasis& out);

// Single h_n(t) by the same recurrence; grid-free, for oracles and odd geometries.
double hermite_value(int n, double t);

// m_j = sqrt(j!/(j+k)!) x^{k/2} e^{-x/2} L_j^{(k)}(x) for j = 0..jmax, computed by a
// scaled three-term recurrence; every m_j is a unitary matrix element, so |m_j| <= 1
// and the recurrence never overflows.
std::vector<double> scaled_laguerre(int k, int jmax, double x);
// Same values written into out[0..jmax]; allocation-free for hot loops.
void scaled_laguerre_into(int k, int jmax, double x, double* out);

// Closed-form A(h_m, h_n)(z). Fast path only: validated against the quadrature
// ambiguity() before use (build gate); the quadrature path remains the authority.
cd ambiguity_hermite(int m, int n, PhasePoint z);

}  // namespace qha
