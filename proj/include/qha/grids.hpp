#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>

namespace qha {

using cd = std::complex<double>;
inline constexpr double PI = 3.141592653589793238462643383279502884;

// Point (x, xi) in phase space R^2.
struct PhasePoint {
  double x = 0.0;
  double xi = 0.0;
};

inline PhasePoint operator+(PhasePoint a, PhasePoint b) { return {a.x + b.x, a.xi + b.xi}; }
inline PhasePoint operator-(PhasePoint a, PhasePoint b) { return {a.x - b.x, a.xi - b.xi}; }
inline PhasePoint operator-(PhasePoint a) { return {-a.x, -a.xi}; }
inline PhasePoint operator*(double c, PhasePoint a) { return {c * a.x, c * a.xi}; }
inline double abs2(PhasePoint z) { return z.x * z.x + z.xi * z.xi; }
inline double abs(PhasePoint z) { return std::hypot(z.x, z.xi); }

// sigma((x,xi),(y,eta)) = y*xi - x*eta.  Antisymmetric, bilinear.
inline double symplectic_form(PhasePoint z, PhasePoint w) { return w.x * z.xi - z.x * w.xi; }

inline std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

// Centered square grid with per-axis nodes (k - M/2)*h, k in [0, M), h = 2L/M.
// Sampling the half-open box [-L, L)^2 keeps the discrete transform an exact
// involution; the induced frequency nodes have spacing 1/(2L) and half-width 1/(2h).
struct PhaseGrid {
  double half_width = 0.0;  // L
  int points = 0;           // M per axis, even

  void validate() const {
    if (!(half_width > 0.0)) throw std::invalid_argument("PhaseGrid: half_width must be positive");
    if (points < 2 || points % 2 != 0) throw std::invalid_argument("PhaseGrid: points_per_axis must be even and >= 2");
  }
  double spacing() const { return 2.0 * half_width / points; }
  // Exact negation symmetry: node1(M-k) == -node1(k) bitwise (k >= 1).
  double node1(int k) const { return (k - points / 2) * spacing(); }
  PhasePoint node(int ix, int ik) const { return {node1(ix), node1(ik)}; }

  // Grid carrying the frequency nodes induced by the discrete transform.
  // Same point count; equals *this exactly when M = 4 L^2 (self-dual sizing).
  PhaseGrid dual() const { return {points / (4.0 * half_width), points}; }
  bool self_dual(double tol = 1e-12) const {
    return std::fabs(dual().half_width - half_width) <= tol * half_width;
  }

  std::uint64_t fingerprint() const {
    std::uint64_t h = fnv1a64(&half_width, sizeof(half_width));
    return fnv1a64(&points, sizeof(points), h);
  }
  bool same_as(const PhaseGrid& o, double tol = 1e-12) const {
    return points == o.points && std::fabs(half_width - o.half_width) <= tol * (half_width + o.half_width);
  }
};

// Centered line grid with nodes (j - M_t/2)*dt, j in [0, M_t), dt = 2T/M_t.
struct LineGrid {
  double half_width = 0.0;  // T
  int points = 0;           // M_t, even

  void validate() const {
    if (!(half_width > 0.0)) throw std::invalid_argument("LineGrid: half_width must be positive");
    if (points < 2 || points % 2 != 0) throw std::invalid_argument("LineGrid: points must be even and >= 2");
  }
  double spacing() const { return 2.0 * half_width / points; }
  double node(int j) const { return (j - points / 2) * spacing(); }

  std::uint64_t fingerprint() const {
    std::uint64_t h = fnv1a64(&half_width, sizeof(half_width));
    return fnv1a64(&points, sizeof(points), h);
  }
  bool same_as(const LineGrid& o, double tol = 1e-12) const {
    return points == o.points && std::fabs(half_width - o.half_width) <= tol * (half_width + o.half_width);
  }
};

}  // namespace qha
