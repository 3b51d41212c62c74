#ifndef NELSONIUM_THERMO_HPP
#define NELSONIUM_THERMO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nelsonium/diffusion.hpp"
#include "nelsonium/fields.hpp"
#include "nelsonium/madelung.hpp"
#include "nelsonium/potentials.hpp"
#include "nelsonium/schrodinger.hpp"

namespace nelsonium {

enum class EntropyConvention { half_girsanov, paper_literal };

std::string entropy_convention_name(EntropyConvention c);

struct EnergyReport {
    double t = 0.0;
    double kinetic = 0.0;
    double potential = 0.0;
    double total = 0.0;
    std::uint32_t n_particles = 1;

    double per_particle_kinetic() const { return kinetic / n_particles; }
    double per_particle_total() const { return total / n_particles; }
};

struct EntropyReport {
    double H0 = 0.0;
    double HT = 0.0;
    double kinetic_integral = 0.0;  // int_0^T K(t) dt
    double kl_quadrature = 0.0;     // direct time integral of the squared drift
    double kl_decomposed = 0.0;     // the convention's closed decomposition
    double closure_gap = 0.0;       // |kl_quadrature - kl_decomposed|
    double kl_pathwise = 0.0;       // filled by the caller when sampled; NaN otherwise
    double excluded_mass = 0.0;     // worst node-mask mass among the entropy integrals
    EntropyConvention convention = EntropyConvention::half_girsanov;
};

// Kinetic energy in both equivalent forms. The gradient form integrates
// (1/2)|grad psi|^2 spectrally; the Madelung form integrates
// (1/2)(|u|^2+|v|^2) rho and is node-mask sensitive.
struct KineticForms {
    double gradient_form = 0.0;
    double madelung_form = 0.0;
    double gap = 0.0;
};

KineticForms kinetic_forms(const ComplexField& psi);
double kinetic_energy(const ComplexField& psi);       // gradient form
double kinetic_energy(const MadelungFields& fields);  // Madelung form

// Literal interaction energy: N-body (1/N) sum_{j<k} int V(x_j - x_k) rho_N,
// Hartree int int rho(x) V(x-y) rho(y) dx dy via periodic convolution. Note
// the Hartree form carries no 1/2; the conserved solver energy does.
double potential_energy(const ComplexField& psi, const PairPotential& pot, SolverMode mode);

// Conserved-energy decomposition of a solver state at time t.
EnergyReport energy_report(double t, const ComplexField& psi, const SchrodingerProblem& problem);

// Boltzmann entropy int rho log rho with 0 log 0 = 0 on the node mask.
struct EntropyValue {
    double value = 0.0;
    double excluded_mass = 0.0;
};

EntropyValue boltzmann_entropy_detail(const RealField& rho, double eps_rel = kNodeEpsRel);
double boltzmann_entropy(const RealField& rho);

// Field-based relative entropy of the diffusion's path law against Wiener
// measure over [0, T], from a uniform Madelung time series. Under
// half_girsanov the quadrature (1/2) int int |u+v|^2 rho is decomposed as
// kinetic_integral + (H_T - H_0)/2; paper_literal instead reports the printed
// form 2 kinetic_integral + H_0 - H_T against the no-half quadrature and its
// (expected nonzero) gap. Throws when the Riemann refinement estimate shows
// the series is too coarse.
EntropyReport relative_entropy_fields(const std::vector<double>& times,
                                      const std::vector<MadelungFields>& series,
                                      EntropyConvention convention,
                                      double coarseness_tol = 0.05);

struct PathwiseKl {
    double estimate = 0.0;
    double std_error = 0.0;
    EntropyConvention convention = EntropyConvention::half_girsanov;
};

// Monte Carlo counterpart from a sampled ensemble: mean over paths of the
// step-resolution Riemann sum of |b(X_t, t)|^2 dt, halved under
// half_girsanov. The ensemble must have been generated under the given drift.
PathwiseKl relative_entropy_pathwise(const PathEnsemble& ensemble, const DriftTrajectory& drift,
                                     EntropyConvention convention);

// Per-particle convergence table for an N sweep against the limit value.
struct ConvergenceSeries {
    std::vector<std::uint32_t> N;
    std::vector<double> per_particle;
    double limit = 0.0;
    std::vector<double> gaps;       // |value/N - limit|
    double fitted_exponent = 0.0;   // log-log slope of gaps vs N; NaN if degenerate
    bool monotone = false;          // gaps nonincreasing within slack
};

ConvergenceSeries kinetic_convergence_series(const std::vector<std::uint32_t>& N_list,
                                             const std::vector<double>& totals,
                                             double limit_value);

// Monotonicity of relative entropy under conditioning: the conditioned
// diffusion's KL never exceeds the projected drift's KL (Jensen).
struct MonotonicityCheck {
    bool holds = false;
    double gap = 0.0;  // kl_projected - kl_conditioned
    double tolerance = 0.0;
};

MonotonicityCheck entropy_monotonicity_check(double kl_conditioned, EntropyConvention conv_cond,
                                             double kl_projected, EntropyConvention conv_proj,
                                             double tolerance = 1e-9);

} // namespace nelsonium

#endif
