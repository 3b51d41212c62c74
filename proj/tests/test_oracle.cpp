// Closed-form Gaussian reference: exchangeable matrix algebra, the Riccati
// flow, rendered states against grid machinery, marginals, drift moments,
// energies and the mean-field limit.

#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "nelsonium/errors.hpp"
#include "nelsonium/madelung.hpp"
#include "nelsonium/metrics.hpp"
#include "nelsonium/oracle.hpp"
#include "nelsonium/quadrature.hpp"
#include "nelsonium/thermo.hpp"

using namespace nelsonium;

namespace {

// Dense 3x3 reference for the exchangeable alpha I + beta J algebra.
struct Dense3 {
    double m[9];
    static Dense3 from(const ExMat& e) {
        Dense3 d{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) d.m[3 * i + j] = e.entry(i, j);
        return d;
    }
    Dense3 mul(const Dense3& o) const {
        Dense3 r{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double acc = 0.0;
                for (int k = 0; k < 3; ++k) acc += m[3 * i + k] * o.m[3 * k + j];
                r.m[3 * i + j] = acc;
            }
        return r;
    }
    double trace() const { return m[0] + m[4] + m[8]; }
};

QuadraticModel entangled_pair() {
    QuadraticModel m;
    m.N = 2;
    m.trap_omega = 1.0;
    m.coupling_g = 0.4;
    m.mean0 = 0.2;
    m.variance0 = 0.5;
    return m;
}

double sup_density_gap(const RealField& a, const RealField& b) {
    double gap = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) gap = std::max(gap, std::abs(a[i] - b[i]));
    return gap;
}

double eval_gap(const VectorField& a, const VectorField& b, const RealField& rho) {
    const double cut = kEvalThresholdRel * rho.max();
    double gap = 0.0;
    for (std::uint32_t c = 0; c < a.components(); ++c)
        for (std::size_t i = 0; i < rho.size(); ++i)
            if (rho[i] >= cut)
                gap = std::max(gap, std::abs(a.component(c)[i] - b.component(c)[i]));
    return gap;
}

} // namespace

TEST_SUITE("oracle") {

TEST_CASE("exchangeable matrix algebra matches a dense reference") {
    const ExMat a{3, 0.8, 0.3};
    const ExMat b{3, -0.2, 0.5};
    const Dense3 da = Dense3::from(a), db = Dense3::from(b);

    const Dense3 prod = Dense3::from(a.mul(b));
    const Dense3 prod_ref = da.mul(db);
    for (int i = 0; i < 9; ++i) CHECK(prod.m[i] == doctest::Approx(prod_ref.m[i]).epsilon(1e-14));

    CHECK(a.det() == doctest::Approx(0.8 * 0.8 * (0.8 + 3.0 * 0.3)).epsilon(1e-14));
    CHECK(a.trace_mul(b) == doctest::Approx(da.mul(db).trace()).epsilon(1e-14));

    const Dense3 ident = Dense3::from(a.mul(a.inverse()));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(ident.m[3 * i + j] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-13));

    CHECK_THROWS_AS((ExMat{3, 0.0, 0.1}.inverse()), std::invalid_argument);
}

TEST_CASE("coherent width is stationary at the trap frequency") {
    QuadraticModel m;
    m.N = 1;
    m.trap_omega = 1.0;
    m.variance0 = 0.5;
    const std::vector<GaussianState> states = solve_quadratic(m, {0.0, 0.7, 1.3});
    for (const GaussianState& s : states) {
        CHECK(std::abs(s.a_cm - cplx{1.0, 0.0}) < 1e-12);
        CHECK(s.s_cm() == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(std::abs(s.mean) < 1e-12);
    }
}

TEST_CASE("Riccati flow and mean dynamics hold numerically") {
    QuadraticModel m;
    m.N = 3;
    m.trap_omega = 1.0;
    m.coupling_g = 0.6;
    m.mean0 = 1.0;
    m.variance0 = 0.8;
    m.phase_curvature0 = 0.4;
    const double t = 0.9, h = 1e-5;
    const std::vector<GaussianState> s = solve_quadratic(m, {t - h, t, t + h});

    const cplx da_cm = (s[2].a_cm - s[0].a_cm) / (2.0 * h);
    const cplx rhs_cm = cplx{0.0, 1.0} * (m.trap_omega * m.trap_omega - s[1].a_cm * s[1].a_cm);
    CHECK(std::abs(da_cm - rhs_cm) < 1e-6);

    const cplx da_rel = (s[2].a_rel - s[0].a_rel) / (2.0 * h);
    const cplx rhs_rel = cplx{0.0, 1.0} * (m.omega_rel_sq() - s[1].a_rel * s[1].a_rel);
    CHECK(std::abs(da_rel - rhs_rel) < 1e-6);

    CHECK(s[1].mean == doctest::Approx(std::cos(t)).epsilon(1e-10));
    const double dm = (s[2].mean - s[0].mean) / (2.0 * h);
    CHECK(dm == doctest::Approx(s[1].momentum).epsilon(1e-6));
}

TEST_CASE("rendered marginals integrate to one and the state is normalized") {
    const QuadraticModel m = entangled_pair();
    const GaussianState state = solve_quadratic(m, {0.3})[0];
    const Grid g2 = build_grid(20.0, 128, 2);
    const ComplexField psi = render_state(state, g2);
    CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-10));

    const Grid g1 = build_grid(20.0, 256, 1);
    const GaussianMarginal marg = exact_marginal(state, 1);
    CHECK(integrate(render_marginal_density(marg, g1)) == doctest::Approx(1.0).epsilon(1e-10));

    CHECK_THROWS_AS(render_state(state, g1), std::invalid_argument);
    CHECK_THROWS_AS(exact_marginal(state, 2), std::invalid_argument);
}

TEST_CASE("closed-form marginal matches grid marginalization of the rendered state") {
    const QuadraticModel m = entangled_pair();
    const GaussianState state = solve_quadratic(m, {0.3})[0];
    const Grid g2 = build_grid(20.0, 128, 2);
    const Grid g1 = build_grid(20.0, 128, 1);

    const MadelungFields full = extract(render_state(state, g2));
    const MarginalSet grid_marg = marginalize(full, 1);
    const GaussianMarginal em = exact_marginal(state, 1);

    CHECK(sup_density_gap(grid_marg.rho, render_marginal_density(em, g1)) < 1e-8);
    const RealField rho_ref = render_marginal_density(em, g1);
    // The conditional average of u integrates the node-masked osmotic field,
    // so near the eval-region edge the conditioned tails are truncated; v's
    // numerator is the unmasked current and stays an order tighter.
    CHECK(eval_gap(grid_marg.u, render_marginal_osmotic(em, g1), rho_ref) < 1e-5);
    CHECK(eval_gap(grid_marg.v, render_marginal_velocity(em, g1), rho_ref) < 1e-6);
}

TEST_CASE("drift second moments: quadrature agreement and the Jensen gap") {
    const QuadraticModel m = entangled_pair();
    const GaussianState state = solve_quadratic(m, {0.3})[0];
    const GaussianMarginal em = exact_marginal(state, 1);

    const Grid g1 = build_grid(24.0, 256, 1);
    const RealField rho = render_marginal_density(em, g1);
    const VectorField b = render_marginal_drift(em, g1);
    double quad = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const double bi = b.component(0)[i];
        quad += bi * bi * rho[i];
    }
    quad *= g1.spacing;
    CHECK(conditioned_drift_second_moment(em) == doctest::Approx(quad).epsilon(1e-8));

    const Grid g2 = build_grid(20.0, 128, 2);
    const MadelungFields full = extract(render_state(state, g2));
    double proj = 0.0;
    for (std::size_t i = 0; i < full.rho.size(); ++i) {
        const double bi = full.u.component(0)[i] + full.v.component(0)[i];
        proj += bi * bi * full.rho[i];
    }
    proj *= g2.spacing * g2.spacing;
    const double proj_closed = projected_drift_second_moment(state, 1);
    CHECK(proj_closed == doctest::Approx(proj).epsilon(1e-6));

    // Conditioning can only reduce the second moment; the entangled state at
    // t > 0 makes the inequality strict.
    const double cond = conditioned_drift_second_moment(em);
    CHECK(cond <= proj_closed + 1e-12);
    CHECK(proj_closed - cond > 1e-6);

    // Product case: no correlations, so projection loses nothing.
    QuadraticModel free_m = entangled_pair();
    free_m.coupling_g = 0.0;
    const GaussianState free_state = solve_quadratic(free_m, {0.3})[0];
    const double cond_free = conditioned_drift_second_moment(exact_marginal(free_state, 1));
    const double proj_free = projected_drift_second_moment(free_state, 1);
    CHECK(cond_free == doctest::Approx(proj_free).epsilon(1e-10));
}

TEST_CASE("oracle energy is conserved and entropy matches the grid") {
    QuadraticModel m;
    m.N = 2;
    m.trap_omega = 1.0;
    m.coupling_g = 0.6;
    m.mean0 = 0.4;
    m.variance0 = 0.7;
    const std::vector<GaussianState> states = solve_quadratic(m, {0.0, 0.4, 1.1});
    const double e0 = exact_entropy_energy(states[0]).total();
    for (const GaussianState& s : states) {
        CHECK(std::abs(exact_entropy_energy(s).total() - e0) < 1e-10);
    }

    const Grid g2 = build_grid(20.0, 128, 2);
    const RealField rho = render_state(states[1], g2).abs_squared();
    CHECK(exact_entropy_energy(states[1]).entropy ==
          doctest::Approx(boltzmann_entropy(rho)).epsilon(1e-6));
}

TEST_CASE("one-body kinetic closed form matches the grid forms") {
    QuadraticModel m;
    m.N = 1;
    m.trap_omega = 1.0;
    m.mean0 = 0.5;
    m.variance0 = 0.7;
    m.phase_curvature0 = 0.3;
    const GaussianState state = solve_quadratic(m, {0.6})[0];
    const Grid g1 = build_grid(20.0, 256, 1);
    const double grid_kin = kinetic_energy(render_state(state, g1));
    CHECK(exact_entropy_energy(state).kinetic == doctest::Approx(grid_kin).epsilon(1e-8));
    CHECK(marginal_kinetic(hartree_limit(m, 0.6)) == doctest::Approx(grid_kin).epsilon(1e-8));
}

TEST_CASE("Gaussian W1 closed forms") {
    CHECK(gaussian_w1(0.3, 0.5, 0.3, 0.5) == 0.0);
    CHECK(gaussian_w1(0.0, 0.5, 0.75, 0.5) == doctest::Approx(0.75).epsilon(1e-12));
    const double sa = 1.0, sb = 1.5;
    const double expected = std::sqrt(2.0 / std::numbers::pi) * std::abs(std::sqrt(sb) - std::sqrt(sa));
    CHECK(gaussian_w1(0.0, sa, 0.0, sb) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("the mean-field limit is the large-N endpoint of the marginals") {
    QuadraticModel m;
    m.N = 4096;
    m.trap_omega = 1.0;
    m.coupling_g = 0.8;
    m.mean0 = 0.3;
    m.variance0 = 0.6;
    const GaussianState state = solve_quadratic(m, {0.6})[0];
    const GaussianMarginal finite = exact_marginal(state, 1);
    const GaussianMarginal limit = hartree_limit(m, 0.6);
    CHECK(std::abs(finite.sigma.entry(0, 0) - limit.sigma.entry(0, 0)) < 5.0 / m.N);
    CHECK(finite.mean == doctest::Approx(limit.mean).epsilon(1e-10));
    CHECK(finite.momentum == doctest::Approx(limit.momentum).epsilon(1e-10));
}

TEST_CASE("model validation rejects impossible parameters") {
    QuadraticModel bad = entangled_pair();
    bad.variance0 = 0.0;
    CHECK_THROWS_AS(solve_quadratic(bad, {0.0}), config_error);

    QuadraticModel imag = entangled_pair();
    imag.trap_omega = 1.0;
    imag.coupling_g = -1.0;
    CHECK_THROWS_AS(solve_quadratic(imag, {0.0}), config_error);

    CHECK(std::string(kOracleHypothesisFlag).find("outside bounded") != std::string::npos);
}

} // TEST_SUITE
