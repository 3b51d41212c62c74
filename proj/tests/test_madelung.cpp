// Madelung extraction, node handling, marginalization of product states,
// and the continuity and momentum-equation residual evaluators.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"

#include "nelsonium/experiment.hpp"
#include "nelsonium/madelung.hpp"
#include "nelsonium/oracle.hpp"
#include "nelsonium/potentials.hpp"
#include "nelsonium/quadrature.hpp"
#include "nelsonium/schrodinger.hpp"

using namespace nelsonium;

namespace {

constexpr double kPi = std::numbers::pi;

// Gaussian wave packet exp(-a (x-m)^2 / 2 + i p (x-m)) with a = 1/(2s) + i c.
ComplexField packet(const Grid& grid, double mean, double variance, double curvature,
                    double momentum) {
    const cplx a{0.5 / variance, curvature};
    return normalized(ComplexField::from_function(grid, [&](const double* x) {
        cplx expo{0.0, 0.0};
        for (std::uint32_t d = 0; d < grid.total_dims; ++d) {
            const double dx = x[d] - mean;
            expo += -0.5 * a * dx * dx + cplx{0.0, momentum * dx};
        }
        return std::exp(expo);
    }));
}

// Sup gap between two vector-field components restricted to points where the
// density clears the evaluation threshold.
double eval_region_gap(const VectorField& a, const VectorField& b, const RealField& rho) {
    double rho_max = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) rho_max = std::max(rho_max, rho[i]);
    const double cut = kEvalThresholdRel * rho_max;
    double gap = 0.0;
    for (std::uint32_t c = 0; c < a.components(); ++c) {
        for (std::size_t i = 0; i < rho.size(); ++i) {
            if (rho[i] < cut) continue;
            gap = std::max(gap, std::abs(a.component(c)[i] - b.component(c)[i]));
        }
    }
    return gap;
}

} // namespace

TEST_SUITE("madelung") {

TEST_CASE("plane wave has flat density, zero osmotic, constant current velocity") {
    const Grid grid = build_grid(8.0, 32, 1);
    const double k = 2.0 * kPi * 3.0 / 8.0;
    const ComplexField psi = normalized(ComplexField::from_function(
        grid, [&](const double* x) { return std::exp(cplx{0.0, k * x[0]}); }));
    const MadelungFields f = extract(psi);
    CHECK(f.node_mass == 0.0);
    for (std::size_t i = 0; i < f.rho.size(); ++i) {
        CHECK(std::abs(f.rho[i] - 1.0 / 8.0) < 1e-13);
        CHECK(std::abs(f.u.component(0)[i]) < 1e-11);
        CHECK(std::abs(f.v.component(0)[i] - k) < 1e-11);
        CHECK(std::abs(f.j.component(0)[i] - k / 8.0) < 1e-12);
        CHECK_FALSE(f.node_mask[i]);
    }
}

TEST_CASE("extracted fields match the closed-form Gaussian velocities") {
    // Box wide enough that the truncation seam at the periodic wrap stays at
    // the 1e-14 level; a tighter box leaks a Gibbs tail into the gradient
    // that 1/|psi| amplifies to ~1e-6 at the evaluation-region edge.
    const Grid grid = build_grid(20.0, 128, 1);
    QuadraticModel model;
    model.N = 1;
    model.trap_omega = 1.0;
    model.coupling_g = 0.0;
    model.mean0 = 0.5;
    model.variance0 = 0.7;
    model.phase_curvature0 = 0.3;
    const GaussianState state = solve_quadratic(model, {0.0})[0];
    const MadelungFields f = extract(render_state(state, grid));
    const GaussianMarginal m = hartree_limit(model, 0.0);
    CHECK(eval_region_gap(f.u, render_marginal_osmotic(m, grid), f.rho) < 1e-6);
    CHECK(eval_region_gap(f.v, render_marginal_velocity(m, grid), f.rho) < 1e-6);
    const RealField rho_exact = render_marginal_density(m, grid);
    double rho_gap = 0.0;
    for (std::size_t i = 0; i < f.rho.size(); ++i) {
        rho_gap = std::max(rho_gap, std::abs(f.rho[i] - rho_exact[i]));
    }
    CHECK(rho_gap < 1e-12);
}

TEST_CASE("nodes are masked and zeroed, never NaN") {
    const Grid grid = build_grid(8.0, 64, 1);
    const ComplexField psi = normalized(ComplexField::from_function(
        grid, [&](const double* x) { return cplx{std::sin(2.0 * kPi * x[0] / 8.0), 0.0}; }));
    const MadelungFields f = extract(psi);
    std::size_t masked = 0;
    for (std::size_t i = 0; i < f.rho.size(); ++i) {
        CHECK(std::isfinite(f.u.component(0)[i]));
        CHECK(std::isfinite(f.v.component(0)[i]));
        if (f.node_mask[i]) {
            ++masked;
            CHECK(f.u.component(0)[i] == 0.0);
            CHECK(f.v.component(0)[i] == 0.0);
        }
    }
    CHECK(masked >= 2);  // the grid hits sin's zeros at x = 0 and x = L/2
    CHECK(f.node_mass < 1e-20);
}

TEST_CASE("marginal of a product state reproduces the one-body fields") {
    const Grid g1 = build_grid(16.0, 64, 1);
    const ComplexField phi = packet(g1, 0.3, 0.6, 0.2, 0.4);
    const ComplexField big = tensor_power(phi, 2);
    const MadelungFields full = extract(big);
    const MarginalSet marg = marginalize(full, 1);
    const MadelungFields one = extract(phi);
    REQUIRE(marg.rho.grid().total_dims == g1.total_dims);

    double rho_gap = 0.0;
    for (std::size_t i = 0; i < one.rho.size(); ++i) {
        rho_gap = std::max(rho_gap, std::abs(marg.rho[i] - one.rho[i]));
    }
    CHECK(rho_gap < 1e-12);
    CHECK(integrate(marg.rho) == doctest::Approx(1.0).epsilon(1e-12));
    // u averages the node-masked osmotic field, so at eval-region edges the
    // masked conditional tail biases it by ~|u| times the masked mass; v and
    // j use the unmasked current numerator and stay exact for a product.
    CHECK(eval_region_gap(marg.u, one.u, one.rho) < 1e-5);
    CHECK(eval_region_gap(marg.v, one.v, one.rho) < 1e-10);
    CHECK(eval_region_gap(marg.j, one.j, one.rho) < 1e-10);

    // The conditioned drift of the kept particle is u + v of the factor; it
    // inherits the masked-tail bias through its u part.
    const VectorField b = conditional_drift(full, 1);
    const VectorField b_ref = add(one.u, one.v);
    CHECK(eval_region_gap(b, b_ref, one.rho) < 1e-5);

    // The two-body osmotic field is a gradient, so its discrete curl is tiny.
    CHECK(max_curl_off_nodes(full.u, full.node_mask) < 1e-8);

    // Weighted norms against the Gaussian closed forms: int u^2 rho = 1/(4s),
    // int (u^2 + v^2) rho adds the phase contribution c^2 s + p^2.
    const double s = 0.6, c = 0.2, p = 0.4;
    CHECK(weighted_l2_norm(one.u, one.rho) ==
          doctest::Approx(std::sqrt(0.25 / s)).epsilon(1e-8));
    CHECK(finite_energy_value(one) ==
          doctest::Approx(0.25 / s + c * c * s + p * p).epsilon(1e-8));
}

TEST_CASE("continuity residual decays at second order under time refinement") {
    const Grid grid = build_grid(20.0, 128, 1);
    QuadraticModel model;
    model.N = 1;
    model.trap_omega = 0.0;
    model.coupling_g = 0.0;
    model.mean0 = 0.0;
    model.variance0 = 0.5;
    auto residual_with = [&](std::size_t n_times) {
        std::vector<double> times(n_times);
        std::vector<RealField> rho;
        std::vector<VectorField> vel;
        for (std::size_t i = 0; i < n_times; ++i) {
            times[i] = 0.4 * static_cast<double>(i) / static_cast<double>(n_times - 1);
            const GaussianMarginal m = hartree_limit(model, times[i]);
            rho.push_back(render_marginal_density(m, grid));
            vel.push_back(render_marginal_velocity(m, grid));
        }
        return continuity_residual(times, rho, vel).strong;
    };
    const double coarse = residual_with(11);
    const double fine = residual_with(21);
    CHECK(coarse > 0.0);
    const double ratio = coarse / fine;
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
}

TEST_CASE("momentum-equation residual vanishes on the stationary trap state") {
    const Grid grid = build_grid(20.0, 128, 1);
    QuadraticModel model;
    model.N = 1;
    model.trap_omega = 1.0;
    model.coupling_g = 0.0;
    model.mean0 = 0.0;
    model.variance0 = 0.5;
    std::vector<double> times;
    std::vector<MadelungFields> series;
    for (int i = 0; i < 9; ++i) {
        times.push_back(0.025 * i);
        series.push_back(oracle_fields_on_grid(hartree_limit(model, times.back()), grid));
    }
    const VectorField grad_V = assemble_trap_gradient(grid, 1.0);
    const MadelungResidualReport rep =
        madelung_residual(times, series, MadelungPotentialMode::external_V, &grad_V, nullptr);
    CHECK(rep.value < 1e-8);
    CHECK(rep.excluded_mass < 1e-6);
}

} // TEST_SUITE
