// Energies and entropies: the two kinetic forms, literal potential energies,
// Boltzmann entropy closed forms, the relative-entropy conventions and their
// closure identities, pathwise Monte Carlo agreement, and the guards.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "nelsonium/diffusion.hpp"
#include "nelsonium/experiment.hpp"
#include "nelsonium/oracle.hpp"
#include "nelsonium/potentials.hpp"
#include "nelsonium/quadrature.hpp"
#include "nelsonium/schrodinger.hpp"
#include "nelsonium/thermo.hpp"

using namespace nelsonium;

namespace {

constexpr double kPi = std::numbers::pi;

ComplexField gaussian_psi(const Grid& grid, double mean, double variance) {
    return normalized(ComplexField::from_function(grid, [&](const double* x) {
        double expo = 0.0;
        for (std::uint32_t d = 0; d < grid.total_dims; ++d) {
            const double dx = x[d] - mean;
            expo += -0.25 * dx * dx / variance;
        }
        return cplx{std::exp(expo), 0.0};
    }));
}

std::vector<MadelungFields> oracle_series(const QuadraticModel& model, const Grid& grid,
                                          double T, std::size_t count,
                                          std::vector<double>* times_out) {
    std::vector<MadelungFields> series;
    times_out->resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        (*times_out)[i] = T * static_cast<double>(i) / static_cast<double>(count - 1);
        series.push_back(oracle_fields_on_grid(hartree_limit(model, (*times_out)[i]), grid));
    }
    return series;
}

DriftTrajectory linear_drift(const Grid& grid, double slope, double T) {
    std::vector<double> comp(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) comp[i] = slope * grid.node(i);
    const VectorField b(grid, {comp});
    return DriftTrajectory{{0.0, T}, {b, b}, DriftProvenance::oracle};
}

} // namespace

TEST_SUITE("thermo") {

TEST_CASE("kinetic forms agree on node-free states") {
    const Grid grid = build_grid(16.0, 128, 1);

    const double k = 2.0 * kPi * 3.0 / 16.0;
    const ComplexField plane = normalized(ComplexField::from_function(
        grid, [&](const double* x) { return std::exp(cplx{0.0, k * x[0]}); }));
    const KineticForms kf_plane = kinetic_forms(plane);
    CHECK(kf_plane.gradient_form == doctest::Approx(0.5 * k * k).epsilon(1e-10));
    CHECK(kf_plane.gap < 1e-8);

    // exp(-x^2/2) has variance 1/2 and kinetic energy 1/4.
    const ComplexField gauss = gaussian_psi(grid, 0.0, 0.5);
    const KineticForms kf_gauss = kinetic_forms(gauss);
    CHECK(kf_gauss.gradient_form == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(kf_gauss.gap < 1e-8);

    const ComplexField pair = normalized(ComplexField::from_function(grid, [](const double* x) {
        const double g1 = std::exp(-0.5 * (x[0] - 1.0) * (x[0] - 1.0));
        const double g2 = std::exp(-0.5 * (x[0] + 1.0) * (x[0] + 1.0));
        return cplx{g1 + g2, 0.0};
    }));
    CHECK(kinetic_forms(pair).gap < 1e-8);
}

TEST_CASE("near-constant pair potential gives the counting values") {
    const double c = 0.3;
    const PairPotential flat = make_potential("gaussian_bump", c, 1e5);

    const Grid g2 = build_grid(16.0, 64, 2);
    const ComplexField psi2 = gaussian_psi(g2, 0.0, 0.5);
    CHECK(potential_energy(psi2, flat, SolverMode::linear_nbody) ==
          doctest::Approx(0.5 * c).epsilon(1e-7));

    const Grid g1 = build_grid(16.0, 64, 1);
    const ComplexField psi1 = gaussian_psi(g1, 0.0, 0.5);
    CHECK(potential_energy(psi1, flat, SolverMode::hartree) ==
          doctest::Approx(c).epsilon(1e-7));

    CHECK_THROWS_AS(potential_energy(psi2, flat, SolverMode::hartree), std::invalid_argument);
}

TEST_CASE("Boltzmann entropy closed forms") {
    const Grid grid = build_grid(8.0, 64, 1);
    const RealField uniform = RealField::constant(grid, 1.0 / 8.0);
    CHECK(boltzmann_entropy(uniform) == doctest::Approx(-std::log(8.0)).epsilon(1e-12));

    const Grid wide = build_grid(20.0, 256, 1);
    const double s = 0.7;
    const ComplexField phi = gaussian_psi(wide, 0.3, s);
    const double h1 = boltzmann_entropy(phi.abs_squared());
    CHECK(h1 == doctest::Approx(-0.5 * std::log(2.0 * kPi * std::numbers::e * s)).epsilon(1e-8));

    const ComplexField phi2 = tensor_power(gaussian_psi(build_grid(20.0, 128, 1), 0.3, s), 2);
    const double h2 = boltzmann_entropy(phi2.abs_squared());
    const double h1_coarse = boltzmann_entropy(gaussian_psi(build_grid(20.0, 128, 1), 0.3, s).abs_squared());
    CHECK(std::abs(h2 - 2.0 * h1_coarse) < 1e-10);
}

TEST_CASE("energy report matches the oracle total on a two-body state") {
    QuadraticModel model;
    model.N = 2;
    model.trap_omega = 1.0;
    model.coupling_g = 0.4;
    model.mean0 = 0.3;
    model.variance0 = 0.5;
    const GaussianState state = solve_quadratic(model, {0.0})[0];

    SchrodingerProblem p;
    p.grid = build_grid(20.0, 128, 2);
    p.n_particles = 2;
    p.potential = make_potential("quadratic_oracle", 0.4, 1.0);
    p.mode = SolverMode::linear_nbody;
    p.dt = 1e-3;
    p.T = 1.0;
    p.trap_omega = 1.0;

    const ComplexField psi = render_state(state, p.grid);
    const EnergyReport er = energy_report(0.0, psi, p);
    const OracleEnergy oe = exact_entropy_energy(state);
    CHECK(er.total == doctest::Approx(oe.total()).epsilon(1e-7));
    CHECK(er.kinetic == doctest::Approx(oe.kinetic).epsilon(1e-7));
    CHECK(er.n_particles == 2);
}

TEST_CASE("stationary OU relative entropy is T/4 with tight closure") {
    const Grid grid = build_grid(20.0, 128, 1);
    QuadraticModel model;
    model.N = 1;
    model.trap_omega = 1.0;
    model.variance0 = 0.5;
    std::vector<double> times;
    const std::vector<MadelungFields> series = oracle_series(model, grid, 0.5, 11, &times);
    const EntropyReport rep =
        relative_entropy_fields(times, series, EntropyConvention::half_girsanov);
    CHECK(rep.kl_quadrature == doctest::Approx(0.5 / 4.0).epsilon(1e-8));
    CHECK(rep.closure_gap < 1e-10);
    CHECK(rep.H0 == doctest::Approx(rep.HT).epsilon(1e-12));
    CHECK(std::isnan(rep.kl_pathwise));
}

TEST_CASE("free Gaussian closure tightens at fine sampling") {
    const Grid grid = build_grid(24.0, 256, 1);
    QuadraticModel model;
    model.N = 1;
    model.trap_omega = 0.0;
    model.variance0 = 0.5;
    std::vector<double> times;
    const std::vector<MadelungFields> series = oracle_series(model, grid, 0.5, 401, &times);

    const EntropyReport hg =
        relative_entropy_fields(times, series, EntropyConvention::half_girsanov);
    CHECK(hg.closure_gap < 1e-6);
    CHECK(hg.kl_quadrature > 0.0);

    // The printed no-half form misses the closure by exactly twice the
    // entropy production.
    const EntropyReport pl =
        relative_entropy_fields(times, series, EntropyConvention::paper_literal);
    CHECK(pl.closure_gap ==
          doctest::Approx(2.0 * std::abs(pl.HT - pl.H0)).epsilon(1e-4));
    CHECK(pl.closure_gap > 0.1);
}

TEST_CASE("pathwise KL vanishes for Wiener and matches the OU quadrature") {
    const Grid grid = build_grid(12.0, 128, 1);

    const DriftTrajectory zero = linear_drift(grid, 0.0, 0.1);
    EulerOptions wopts;
    wopts.seed = 13;
    const PathEnsemble wiener = euler_maruyama(zero, std::vector<double>(100, 0.0), 1e-3, wopts);
    const PathwiseKl wkl = relative_entropy_pathwise(wiener, zero,
                                                     EntropyConvention::half_girsanov);
    CHECK(wkl.estimate == 0.0);
    CHECK(wkl.std_error == 0.0);

    const DriftTrajectory ou = linear_drift(grid, -1.0, 1.0);
    const RealField raw = RealField::from_function(grid, [](const double* x) {
        return std::exp(-x[0] * x[0]);
    });
    const RealField stationary = scale(raw, 1.0 / integrate(raw));
    const std::uint32_t K = 20000;
    const std::vector<double> x0 = sample_initial(stationary, K, 3);
    EulerOptions opts;
    opts.seed = 9;
    opts.snapshot_stride = 200;
    const PathEnsemble ens = euler_maruyama(ou, x0, 1e-3, opts);
    const PathwiseKl hg = relative_entropy_pathwise(ens, ou, EntropyConvention::half_girsanov);
    CHECK(hg.std_error > 0.0);
    CHECK(std::abs(hg.estimate - 0.25) <= 3.0 * hg.std_error + 5e-4);

    const PathwiseKl pl = relative_entropy_pathwise(ens, ou, EntropyConvention::paper_literal);
    CHECK(pl.estimate == doctest::Approx(2.0 * hg.estimate).epsilon(1e-12));
}

TEST_CASE("provenance and convention guards throw") {
    const Grid grid = build_grid(12.0, 64, 1);
    const DriftTrajectory zero = linear_drift(grid, 0.0, 0.1);
    EulerOptions opts;
    opts.seed = 1;
    const PathEnsemble ens = euler_maruyama(zero, {0.0, 0.5}, 1e-3, opts);
    DriftTrajectory other = zero;
    other.provenance = DriftProvenance::limit_hartree;
    CHECK_THROWS_AS(relative_entropy_pathwise(ens, other, EntropyConvention::half_girsanov),
                    std::invalid_argument);

    CHECK_THROWS_AS(entropy_monotonicity_check(0.1, EntropyConvention::half_girsanov, 0.2,
                                               EntropyConvention::paper_literal),
                    std::invalid_argument);
    const MonotonicityCheck ok = entropy_monotonicity_check(
        0.3, EntropyConvention::half_girsanov, 0.5, EntropyConvention::half_girsanov);
    CHECK(ok.holds);
    CHECK(ok.gap == doctest::Approx(0.2));
    const MonotonicityCheck bad = entropy_monotonicity_check(
        0.5, EntropyConvention::half_girsanov, 0.3, EntropyConvention::half_girsanov);
    CHECK_FALSE(bad.holds);
}

TEST_CASE("kinetic convergence series fits the 1/N law") {
    const std::vector<std::uint32_t> N_list = {2, 4, 8, 16};
    std::vector<double> totals;
    for (std::uint32_t N : N_list) totals.push_back(N * (0.7 + 0.3 / N));
    const ConvergenceSeries cs = kinetic_convergence_series(N_list, totals, 0.7);
    REQUIRE(cs.gaps.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(cs.gaps[i] == doctest::Approx(0.3 / N_list[i]).epsilon(1e-12));
    }
    CHECK(cs.fitted_exponent == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(cs.monotone);
}

TEST_CASE("a coarse entropy series is rejected") {
    const Grid grid = build_grid(24.0, 128, 1);
    QuadraticModel model;
    model.N = 1;
    model.trap_omega = 0.0;
    model.variance0 = 0.5;
    std::vector<double> times;
    const std::vector<MadelungFields> series = oracle_series(model, grid, 2.0, 3, &times);
    CHECK_THROWS_AS(relative_entropy_fields(times, series, EntropyConvention::half_girsanov),
                    std::invalid_argument);
}

} // TEST_SUITE
