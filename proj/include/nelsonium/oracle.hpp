#ifndef NELSONIUM_ORACLE_HPP
#define NELSONIUM_ORACLE_HPP

#include <cstdint>
#include <vector>

#include "nelsonium/fields.hpp"
#include "nelsonium/grid.hpp"

namespace nelsonium {

// Every oracle-derived report must carry this tag: the quadratic pair
// potential sits outside the bounded-potential hypotheses and serves purely
// as a closed-form numerical reference.
inline constexpr const char* kOracleHypothesisFlag =
    "quadratic reference potential outside bounded-potential hypotheses";

// alpha I + beta J on R^k, J the all-ones matrix: the closed algebra of
// exchange-symmetric matrices. Eigenvalues are alpha + k beta on the uniform
// direction and alpha on its orthogonal complement, so inversion and
// determinants stay scalar work.
struct ExMat {
    std::uint32_t k = 1;
    double alpha = 0.0;
    double beta = 0.0;

    ExMat mul(const ExMat& o) const;
    ExMat plus(const ExMat& o) const;
    ExMat scaled(double s) const;
    ExMat inverse() const;
    double det() const;
    double trace_mul(const ExMat& o) const;  // tr(this * o)
    double entry(std::uint32_t i, std::uint32_t j) const {
        return (i == j ? alpha : 0.0) + beta;
    }
};

// Harmonic trap omega plus weak-coupling quadratic pair interaction
// (1/N) sum_{j<k} g (x_j - x_k)^2, exchangeable Gaussian initial data:
// per-particle mean m0, variance s0, and an optional initial phase curvature
// c0 (imaginary part of the width amplitude).
struct QuadraticModel {
    std::uint32_t N = 1;
    double trap_omega = 1.0;
    double coupling_g = 0.0;
    double mean0 = 0.0;
    double variance0 = 0.5;
    double phase_curvature0 = 0.0;

    // Normal modes: center of mass at omega, N-1 relative modes at
    // sqrt(omega^2 + 2g).
    double omega_cm() const { return trap_omega; }
    double omega_rel_sq() const { return trap_omega * trap_omega + 2.0 * coupling_g; }
};

// The quadratic flow keeps psi Gaussian:
//   psi_t(x) proportional to exp(-(x-m)^T A (x-m)/2 + i p . (x-m)),
// A exchange-symmetric with mode amplitudes a_cm, a_rel obeying scalar
// Riccati equations da/dt = i(Omega^2 - a^2), solved via a = -i l'/l with
// l'' = -Omega^2 l.
struct GaussianState {
    std::uint32_t N = 1;
    double t = 0.0;
    double trap_omega = 0.0;  // model constants carried for energy formulas
    double coupling_g = 0.0;
    double mean = 0.0;      // per particle
    double momentum = 0.0;  // per particle
    cplx a_cm{1.0, 0.0};
    cplx a_rel{1.0, 0.0};

    double s_cm() const { return 0.5 / a_cm.real(); }
    double s_rel() const { return 0.5 / a_rel.real(); }
    ExMat covariance() const;  // s_rel I + ((s_cm - s_rel)/N) J
    ExMat re_a() const;
    ExMat im_a() const;
};

// n-body marginal in closed form: Gaussian density with exchangeable
// covariance plus the linear osmotic and current velocity fields
//   u(x) = -U (x - mean), v(x) = -B (x - mean) + momentum.
// B includes the conditional-expectation correction from the traced-out
// block, so v matches the conditioned drift's current part.
struct GaussianMarginal {
    std::uint32_t n = 1;
    double t = 0.0;
    double mean = 0.0;
    double momentum = 0.0;
    ExMat sigma;
    ExMat u_matrix;
    ExMat v_matrix;
};

std::vector<GaussianState> solve_quadratic(const QuadraticModel& model,
                                           const std::vector<double>& times);

GaussianMarginal exact_marginal(const GaussianState& state, std::uint32_t n);

// Self-consistent one-body limit: the width breathes at the relative-mode
// frequency while the mean follows the bare trap.
GaussianMarginal hartree_limit(const QuadraticModel& model, double t);

struct OracleEnergy {
    double entropy = 0.0;         // int rho log rho sign convention
    double kinetic = 0.0;
    double potential_pair = 0.0;  // (1/N) sum_{j<k} g E[(x_j-x_k)^2]
    double potential_trap = 0.0;

    double total() const { return kinetic + potential_pair + potential_trap; }
};

OracleEnergy exact_entropy_energy(const GaussianState& state);
double marginal_entropy(const GaussianMarginal& m);
double marginal_kinetic(const GaussianMarginal& m);  // (1/2) E[|u|^2 + |v|^2]

// Squared-drift moments feeding the KL integrands: the conditioned drift
// u+v under rho_n, and the first n components of the full N-body drift
// under rho_N (the Jensen upper bound of the projection).
double conditioned_drift_second_moment(const GaussianMarginal& m);
double projected_drift_second_moment(const GaussianState& state, std::uint32_t n);

// Exact 1D Wasserstein-1 distance between Gaussians.
double gaussian_w1(double mean_a, double var_a, double mean_b, double var_b);

ComplexField render_state(const GaussianState& state, const Grid& grid);
RealField render_marginal_density(const GaussianMarginal& m, const Grid& grid);
VectorField render_marginal_velocity(const GaussianMarginal& m, const Grid& grid);
VectorField render_marginal_osmotic(const GaussianMarginal& m, const Grid& grid);
VectorField render_marginal_drift(const GaussianMarginal& m, const Grid& grid);  // u + v

} // namespace nelsonium

#endif
