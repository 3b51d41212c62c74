#include "nelsonium/oracle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nelsonium/errors.hpp"
#include "nelsonium/quadrature.hpp"

namespace nelsonium {

ExMat ExMat::mul(const ExMat& o) const {
    if (k != o.k) throw std::invalid_argument("ExMat: dimension mismatch");
    return {k, alpha * o.alpha,
            alpha * o.beta + beta * o.alpha + static_cast<double>(k) * beta * o.beta};
}

ExMat ExMat::plus(const ExMat& o) const {
    if (k != o.k) throw std::invalid_argument("ExMat: dimension mismatch");
    return {k, alpha + o.alpha, beta + o.beta};
}

ExMat ExMat::scaled(double s) const { return {k, alpha * s, beta * s}; }

ExMat ExMat::inverse() const {
    const double uni = alpha + static_cast<double>(k) * beta;
    if (alpha == 0.0 || uni == 0.0) throw std::invalid_argument("ExMat: singular");
    return {k, 1.0 / alpha, -beta / (alpha * uni)};
}

double ExMat::det() const {
    return std::pow(alpha, static_cast<double>(k - 1)) *
           (alpha + static_cast<double>(k) * beta);
}

double ExMat::trace_mul(const ExMat& o) const {
    const ExMat p = mul(o);
    return static_cast<double>(k) * (p.alpha + p.beta);
}

ExMat GaussianState::covariance() const {
    return {N, s_rel(), (s_cm() - s_rel()) / static_cast<double>(N)};
}

ExMat GaussianState::re_a() const {
    return {N, a_rel.real(), (a_cm.real() - a_rel.real()) / static_cast<double>(N)};
}

ExMat GaussianState::im_a() const {
    return {N, a_rel.imag(), (a_cm.imag() - a_rel.imag()) / static_cast<double>(N)};
}

namespace {

// Width-amplitude flow a(t) = -i l'(t)/l(t), l'' = -Omega^2 l, l(0) = 1,
// l'(0) = i a0.
cplx amplitude_at(double omega_sq, cplx a0, double t) {
    cplx l, ldot;
    if (omega_sq > 0.0) {
        const double w = std::sqrt(omega_sq);
        l = std::cos(w * t) + cplx(0.0, 1.0) * a0 / w * std::sin(w * t);
        ldot = -w * std::sin(w * t) + cplx(0.0, 1.0) * a0 * std::cos(w * t);
    } else {
        l = 1.0 + cplx(0.0, 1.0) * a0 * t;
        ldot = cplx(0.0, 1.0) * a0;
    }
    return cplx(0.0, -1.0) * ldot / l;
}

void validate(const QuadraticModel& model) {
    if (model.N < 1) throw config_error("oracle: N must be at least 1");
    if (!(model.variance0 > 0.0)) throw config_error("oracle: initial variance must be positive");
    if (model.trap_omega < 0.0) throw config_error("oracle: trap frequency must be nonnegative");
    if (model.omega_rel_sq() < 0.0)
        throw config_error("oracle: imaginary relative-mode frequency (coupling too negative "
                           "for stability)");
}

} // namespace

std::vector<GaussianState> solve_quadratic(const QuadraticModel& model,
                                           const std::vector<double>& times) {
    validate(model);
    const cplx a0(0.5 / model.variance0, model.phase_curvature0);
    const double w = model.trap_omega;

    std::vector<GaussianState> out;
    out.reserve(times.size());
    for (double t : times) {
        GaussianState s;
        s.N = model.N;
        s.t = t;
        s.trap_omega = model.trap_omega;
        s.coupling_g = model.coupling_g;
        s.mean = model.mean0 * std::cos(w * t);
        s.momentum = -model.mean0 * w * std::sin(w * t);
        s.a_cm = amplitude_at(w * w, a0, t);
        s.a_rel = amplitude_at(model.omega_rel_sq(), a0, t);
        out.push_back(s);
    }
    return out;
}

GaussianMarginal exact_marginal(const GaussianState& state, std::uint32_t n) {
    if (n < 1 || n >= state.N)
        throw std::invalid_argument("exact_marginal: need 1 <= n < N");
    const double s = state.s_rel();
    const double c = (state.s_cm() - s) / static_cast<double>(state.N);
    const double q = state.a_rel.imag();
    const double r = (state.a_cm.imag() - q) / static_cast<double>(state.N);

    GaussianMarginal m;
    m.n = n;
    m.t = state.t;
    m.mean = state.mean;
    m.momentum = state.momentum;
    m.sigma = {n, s, c};
    m.u_matrix = m.sigma.inverse().scaled(0.5);
    // Conditional correction: the traced-out block contributes through the
    // Gaussian regression matrix Sigma_tail,head Sigma_head,head^{-1}, whose
    // exchangeable form is (c/(s + n c)) J.
    const double nd = static_cast<double>(n);
    const double tail = static_cast<double>(state.N - n);
    m.v_matrix = {n, q, r + r * tail * c / (s + nd * c)};
    return m;
}

GaussianMarginal hartree_limit(const QuadraticModel& model, double t) {
    validate(model);
    const cplx a0(0.5 / model.variance0, model.phase_curvature0);
    const cplx a = amplitude_at(model.omega_rel_sq(), a0, t);
    const double w = model.trap_omega;

    GaussianMarginal m;
    m.n = 1;
    m.t = t;
    m.mean = model.mean0 * std::cos(w * t);
    m.momentum = -model.mean0 * w * std::sin(w * t);
    m.sigma = {1, 0.5 / a.real(), 0.0};
    m.u_matrix = {1, a.real(), 0.0};
    m.v_matrix = {1, a.imag(), 0.0};
    return m;
}

OracleEnergy exact_entropy_energy(const GaussianState& state) {
    const auto N = static_cast<double>(state.N);
    const double s_cm = state.s_cm();
    const double s_rel = state.s_rel();
    const double two_pi_e = 2.0 * std::numbers::pi * std::numbers::e;

    OracleEnergy e;
    e.entropy = -0.5 * (N * std::log(two_pi_e) + std::log(s_cm) + (N - 1.0) * std::log(s_rel));
    e.kinetic = 0.5 * (std::norm(state.a_cm) * s_cm + N * state.momentum * state.momentum) +
                (N - 1.0) * 0.5 * std::norm(state.a_rel) * s_rel;
    // E[(x_j - x_k)^2] = 2 s_rel for exchangeable Gaussians, and the trap
    // sees tr Sigma = s_cm + (N-1) s_rel plus the mean offsets.
    e.potential_pair = state.coupling_g * (N - 1.0) * s_rel;
    const double w2 = state.trap_omega * state.trap_omega;
    e.potential_trap =
        0.5 * w2 * (N * state.mean * state.mean + s_cm + (N - 1.0) * s_rel);
    return e;
}

double marginal_entropy(const GaussianMarginal& m) {
    const double two_pi_e = 2.0 * std::numbers::pi * std::numbers::e;
    return -0.5 * (static_cast<double>(m.n) * std::log(two_pi_e) + std::log(m.sigma.det()));
}

double marginal_kinetic(const GaussianMarginal& m) {
    const double u2 = m.u_matrix.mul(m.u_matrix).trace_mul(m.sigma);
    const double v2 = m.v_matrix.mul(m.v_matrix).trace_mul(m.sigma);
    return 0.5 * (u2 + v2 + static_cast<double>(m.n) * m.momentum * m.momentum);
}

double conditioned_drift_second_moment(const GaussianMarginal& m) {
    const ExMat C = m.u_matrix.plus(m.v_matrix);
    return C.mul(C).trace_mul(m.sigma) +
           static_cast<double>(m.n) * m.momentum * m.momentum;
}

double projected_drift_second_moment(const GaussianState& state, std::uint32_t n) {
    if (n < 1 || n > state.N)
        throw std::invalid_argument("projected_drift_second_moment: need 1 <= n <= N");
    const ExMat C = state.re_a().plus(state.im_a());
    const ExMat P = C.mul(state.covariance()).mul(C);
    return static_cast<double>(n) *
           (P.alpha + P.beta + state.momentum * state.momentum);
}

double gaussian_w1(double mean_a, double var_a, double mean_b, double var_b) {
    const double delta = mean_a - mean_b;
    const double tau = std::sqrt(var_a) - std::sqrt(var_b);
    if (std::abs(tau) < 1e-300) return std::abs(delta);
    // E|delta + tau Z| under the comonotone coupling; the erf argument needs
    // |tau| so the mean term keeps its sign for either ordering of widths.
    const double z = delta / std::abs(tau);
    return delta * std::erf(z / std::numbers::sqrt2) +
           std::abs(tau) * std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * z * z);
}

ComplexField render_state(const GaussianState& state, const Grid& grid) {
    if (grid.total_dims != state.N)
        throw std::invalid_argument("render_state: grid dimension must equal N");
    const cplx a_rel = state.a_rel;
    const cplx mix = (state.a_cm - state.a_rel) / static_cast<double>(state.N);
    const double m = state.mean;
    const double p = state.momentum;
    const std::uint32_t D = grid.total_dims;
    ComplexField psi = ComplexField::from_function(grid, [&](const double* x) {
        double sum = 0.0, sumsq = 0.0;
        for (std::uint32_t a = 0; a < D; ++a) {
            const double d = x[a] - m;
            sum += d;
            sumsq += d * d;
        }
        const cplx quad = a_rel * sumsq + mix * sum * sum;
        return std::exp(-0.5 * quad + cplx(0.0, 1.0) * p * sum);
    });
    return normalized(psi);
}

RealField render_marginal_density(const GaussianMarginal& m, const Grid& grid) {
    if (grid.total_dims != m.n)
        throw std::invalid_argument("render_marginal_density: grid dimension must equal n");
    const ExMat inv = m.sigma.inverse();
    const std::uint32_t D = grid.total_dims;
    RealField rho = RealField::from_function(grid, [&](const double* x) {
        double sum = 0.0, sumsq = 0.0;
        for (std::uint32_t a = 0; a < D; ++a) {
            const double d = x[a] - m.mean;
            sum += d;
            sumsq += d * d;
        }
        return std::exp(-0.5 * (inv.alpha * sumsq + inv.beta * sum * sum));
    });
    const double mass = integrate(rho);
    return scale(rho, 1.0 / mass);
}

namespace {

VectorField render_linear_field(const ExMat& C, double mean, double shift, const Grid& grid) {
    const std::uint32_t D = grid.total_dims;
    std::vector<std::vector<double>> comp(D, std::vector<double>(grid.size()));
    std::vector<std::uint32_t> idx(D);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.unflatten(i, idx.data());
        double sum = 0.0;
        for (std::uint32_t a = 0; a < D; ++a) sum += grid.node(idx[a]) - mean;
        for (std::uint32_t a = 0; a < D; ++a) {
            const double d = grid.node(idx[a]) - mean;
            comp[a][i] = shift - (C.alpha * d + C.beta * sum);
        }
    }
    return VectorField(grid, std::move(comp));
}

} // namespace

VectorField render_marginal_velocity(const GaussianMarginal& m, const Grid& grid) {
    if (grid.total_dims != m.n)
        throw std::invalid_argument("render_marginal_velocity: grid dimension must equal n");
    return render_linear_field(m.v_matrix, m.mean, m.momentum, grid);
}

VectorField render_marginal_osmotic(const GaussianMarginal& m, const Grid& grid) {
    if (grid.total_dims != m.n)
        throw std::invalid_argument("render_marginal_osmotic: grid dimension must equal n");
    return render_linear_field(m.u_matrix, m.mean, 0.0, grid);
}

VectorField render_marginal_drift(const GaussianMarginal& m, const Grid& grid) {
    if (grid.total_dims != m.n)
        throw std::invalid_argument("render_marginal_drift: grid dimension must equal n");
    return render_linear_field(m.u_matrix.plus(m.v_matrix), m.mean, m.momentum, grid);
}

} // namespace nelsonium
