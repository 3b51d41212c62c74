#ifndef NELSONIUM_QUADRATURE_HPP
#define NELSONIUM_QUADRATURE_HPP

#include <cstdint>
#include <vector>

#include "nelsonium/fields.hpp"

namespace nelsonium {

// Rectangle-rule integral dx^D * sum, accumulated in flat index order so the
// result is reproducible bit-for-bit.
double integrate(const RealField& f);

// Integrates out the listed axes, producing a field on the grid spanned by the
// remaining axes (in their original order). The kept grid inherits L and M.
RealField integrate_axes(const RealField& f, const std::vector<std::uint32_t>& axes_out);

// Periodic multilinear interpolation at an arbitrary point (D coordinates).
double interpolate(const RealField& f, const double* point);
std::vector<double> interpolate(const VectorField& f, const double* point);

// Allocation-free overload for sampler hot loops; out must hold D doubles.
void interpolate(const VectorField& f, const double* point, double* out);

} // namespace nelsonium

#endif
