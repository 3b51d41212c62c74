#ifndef NELSONIUM_FFT_HPP
#define NELSONIUM_FFT_HPP

#include <complex>
#include <vector>

#include "nelsonium/grid.hpp"

namespace nelsonium {

// In-place full-dimensional DFT of a row-major M^D array. Plans are cached per
// (M, D, direction) with FFTW_ESTIMATE so repeated transforms are cheap and
// runs are reproducible; plan creation is serialized internally.
void fft_forward(const Grid& grid, std::complex<double>* data);

// Inverse transform including the 1/M^D normalization.
void fft_inverse(const Grid& grid, std::complex<double>* data);

} // namespace nelsonium

#endif
