#pragma once

#include <complex>

namespace qha::fft {

using cd = std::complex<double>;

// Unnormalized forward DFT, kernel exp(-2*pi*i*j*p/m), in place.
void dft1_forward(cd* data, int m);
// Row-major m x m, forward DFT along both axes, in place.
void dft2_forward(cd* data, int m);

}  // namespace qha::fft
