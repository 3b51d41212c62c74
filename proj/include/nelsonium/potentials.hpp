#ifndef NELSONIUM_POTENTIALS_HPP
#define NELSONIUM_POTENTIALS_HPP

#include <cstdint>
#include <string>

#include "nelsonium/fields.hpp"

namespace nelsonium {

enum class PotentialKind { gaussian_bump, cosine_bounded, quadratic_oracle };

// Even pair potential V(r) with amplitude g and width sigma:
//   gaussian_bump    V(r) = g exp(-r^2 / (2 sigma^2))      bounded, sup|V| = |g|
//   cosine_bounded   V(r) = g cos(r / sigma)                bounded, sup|V| = |g|
//   quadratic_oracle V(r) = g r^2                            unbounded (oracle only)
// Pair separations are always the minimal-image difference on the torus.
struct PairPotential {
    PotentialKind kind = PotentialKind::gaussian_bump;
    double amplitude = 0.0;
    double width = 1.0;

    bool bounded() const { return kind != PotentialKind::quadratic_oracle; }
    double operator()(double r) const;
    // dV/dr at signed separation r (odd function).
    double derivative(double r) const;
};

PairPotential make_potential(const std::string& kind, double amplitude, double width);
std::string potential_kind_name(PotentialKind kind);

// Signed minimal-image difference a - b wrapped into [-L/2, L/2).
double periodic_difference(double a, double b, double L);

// (1/N) sum_{j<k} V(x_j - x_k) on a D = N grid.
RealField assemble_nbody_potential(const Grid& grid, const PairPotential& pot, std::uint32_t N);

// External trap (omega^2 / 2) sum_j x_j^2, used by the oracle cross-checks.
RealField assemble_trap(const Grid& grid, double omega);

// Analytic gradients of the assembled potentials. Residual evaluators use
// these instead of spectral derivatives: the trap is not box-periodic, and
// analytic evaluation is exact either way.
//   component a of the pair term: (1/N) sum_{k != a} V'(x_a - x_k)
VectorField assemble_nbody_potential_gradient(const Grid& grid, const PairPotential& pot,
                                              std::uint32_t N);
//   component a of the trap: omega^2 x_a
VectorField assemble_trap_gradient(const Grid& grid, double omega);

// V rendered on a 1-axis grid (kernel for the Hartree convolution).
RealField pair_kernel_field(const Grid& grid, const PairPotential& pot);

} // namespace nelsonium

#endif
