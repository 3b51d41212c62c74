#ifndef NELSONIUM_SPECTRAL_HPP
#define NELSONIUM_SPECTRAL_HPP

#include "nelsonium/fields.hpp"

namespace nelsonium {

// Fourier-multiplier derivative along one axis; exact for band-limited fields.
ComplexField spectral_gradient(const ComplexField& f, std::uint32_t axis);
RealField spectral_gradient(const RealField& f, std::uint32_t axis);

// Second derivative along one axis (multiplier -k^2).
RealField spectral_second_derivative(const RealField& f, std::uint32_t axis);

// Sum of second derivatives over all axes.
RealField spectral_laplacian(const RealField& f);

// Periodic convolution: (a*b)(x) = dx^D * sum_y a(x-y) b(y).
RealField periodic_convolution(const RealField& a, const RealField& b);

// Same convolution against a precomputed DFT of the kernel (forward transform
// of the kernel samples, unnormalized). Used by the Hartree stepper.
std::vector<cplx> convolution_kernel_fft(const RealField& kernel);
RealField periodic_convolution_with_kernel(const RealField& b, const std::vector<cplx>& kernel_fft);

} // namespace nelsonium

#endif
