#ifndef NELSONIUM_SCHRODINGER_HPP
#define NELSONIUM_SCHRODINGER_HPP

#include <cstdint>
#include <vector>

#include "nelsonium/fields.hpp"
#include "nelsonium/potentials.hpp"

namespace nelsonium {

enum class SolverMode { linear_nbody, hartree };

struct SchrodingerProblem {
    Grid grid;
    std::uint32_t n_particles = 1;
    PairPotential potential;
    SolverMode mode = SolverMode::linear_nbody;
    double dt = 1e-3;
    double T = 1.0;
    double trap_omega = 0.0;  // external trap, oracle configs only

    // Breach thresholds for evolve(); the per-sample conservation log carries
    // the exact drifts so reports can assert tighter numbers.
    double norm_breach = 1e-8;
    double energy_breach = 1e-4;
};

struct ConservationSample {
    double t = 0.0;
    double norm = 0.0;
    double energy = 0.0;
};

struct EvolveResult {
    std::vector<double> times;
    std::vector<ComplexField> states;
    std::vector<ConservationSample> conservation;
};

// One Strang step exp(-i dt W/2) exp(i dt Lap/2) exp(-i dt W/2) with a fixed
// potential field W. Convenience form that rebuilds phase tables per call; the
// evolve() loop caches them.
ComplexField step_strang(const ComplexField& psi, const RealField& W, double dt);

// Hartree step: W = trap + V*|psi|^2 recomputed before each potential
// half-step (the density is unchanged by the potential phase, so this keeps
// the step unitary). kernel_fft comes from convolution_kernel_fft.
ComplexField step_strang_hartree(const ComplexField& psi, const std::vector<cplx>& kernel_fft,
                                 const RealField& trap, double dt);

// Total energy of the problem's conserved functional:
//   linear_nbody: K + <W>          with W = trap + (1/N) pair sum
//   hartree:      K + <trap> + (1/2) <V*rho>
double total_energy(const SchrodingerProblem& problem, const ComplexField& psi);

// Marches psi0 to T, returning states at the requested sample times (which
// must sit on the dt lattice) with norm/energy logged at each. Throws
// numerical_breach on NaN states or conservation drift beyond the thresholds.
EvolveResult evolve(const SchrodingerProblem& problem, const ComplexField& psi0,
                    const std::vector<double>& sample_times);

} // namespace nelsonium

#endif
