#include "nelsonium/thermo.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "nelsonium/metrics.hpp"
#include "nelsonium/quadrature.hpp"
#include "nelsonium/spectral.hpp"

namespace nelsonium {

std::string entropy_convention_name(EntropyConvention c) {
    return c == EntropyConvention::half_girsanov ? "half_girsanov" : "paper_literal";
}

KineticForms kinetic_forms(const ComplexField& psi) {
    KineticForms out;
    for (std::uint32_t a = 0; a < psi.grid().total_dims; ++a) {
        const double n = spectral_gradient(psi, a).norm();
        out.gradient_form += 0.5 * n * n;
    }
    out.madelung_form = kinetic_energy(extract(psi));
    out.gap = std::abs(out.gradient_form - out.madelung_form);
    return out;
}

double kinetic_energy(const ComplexField& psi) {
    double total = 0.0;
    for (std::uint32_t a = 0; a < psi.grid().total_dims; ++a) {
        const double n = spectral_gradient(psi, a).norm();
        total += 0.5 * n * n;
    }
    return total;
}

double kinetic_energy(const MadelungFields& fields) { return 0.5 * finite_energy_value(fields); }

double potential_energy(const ComplexField& psi, const PairPotential& pot, SolverMode mode) {
    const RealField rho = psi.abs_squared();
    if (mode == SolverMode::linear_nbody) {
        const std::uint32_t N = psi.grid().total_dims;
        return integrate(multiply(assemble_nbody_potential(psi.grid(), pot, N), rho));
    }
    if (psi.grid().total_dims != 1)
        throw std::invalid_argument("potential_energy: hartree mode expects a one-body state");
    const RealField conv = periodic_convolution(rho, pair_kernel_field(psi.grid(), pot));
    return integrate(multiply(rho, conv));
}

EnergyReport energy_report(double t, const ComplexField& psi, const SchrodingerProblem& problem) {
    EnergyReport r;
    r.t = t;
    r.kinetic = kinetic_energy(psi);
    r.total = total_energy(problem, psi);
    r.potential = r.total - r.kinetic;
    r.n_particles = problem.n_particles;
    return r;
}

EntropyValue boltzmann_entropy_detail(const RealField& rho, double eps_rel) {
    const double eps = eps_rel * rho.max();
    EntropyValue out;
    double sum = 0.0;
    double excluded = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const double r = rho[i];
        if (r < -1e-14)
            throw std::invalid_argument("boltzmann_entropy: negative density entry beyond -1e-14");
        if (r <= eps) {
            excluded += std::max(r, 0.0);
            continue;
        }
        sum += r * std::log(r);
    }
    double weight = 1.0;
    for (std::uint32_t a = 0; a < rho.grid().total_dims; ++a) weight *= rho.grid().spacing;
    out.value = sum * weight;
    out.excluded_mass = excluded * weight;
    return out;
}

double boltzmann_entropy(const RealField& rho) { return boltzmann_entropy_detail(rho).value; }

namespace {

double trapezoid(const std::vector<double>& times, const std::vector<double>& f) {
    double acc = 0.0;
    for (std::size_t k = 1; k < times.size(); ++k)
        acc += 0.5 * (f[k] + f[k - 1]) * (times[k] - times[k - 1]);
    return acc;
}

// Trapezoid error estimate from second differences: per interval the error is
// dt^3 f''/12, and the centered second difference is f'' dt^2.
double trapezoid_error_estimate(const std::vector<double>& f, double dt) {
    double acc = 0.0;
    for (std::size_t k = 1; k + 1 < f.size(); ++k)
        acc += std::abs(f[k + 1] - 2.0 * f[k] + f[k - 1]);
    return acc * dt / 12.0;
}

} // namespace

EntropyReport relative_entropy_fields(const std::vector<double>& times,
                                      const std::vector<MadelungFields>& series,
                                      EntropyConvention convention, double coarseness_tol) {
    if (times.size() < 3 || series.size() != times.size())
        throw std::invalid_argument("relative_entropy_fields: need >= 3 aligned time slices");
    const double dt = times[1] - times[0];
    for (std::size_t k = 1; k < times.size(); ++k)
        if (std::abs(times[k] - times[k - 1] - dt) > 1e-9 * dt)
            throw std::invalid_argument("relative_entropy_fields: time slices must be uniform");

    std::vector<double> kinetic(times.size()), drift_sq(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        const MadelungFields& F = series[k];
        kinetic[k] = kinetic_energy(F);
        double acc = 0.0;
        for (std::uint32_t a = 0; a < F.rho.grid().total_dims; ++a) {
            const auto& u = F.u.component(a);
            const auto& v = F.v.component(a);
            for (std::size_t i = 0; i < F.rho.size(); ++i) {
                const double b = u[i] + v[i];
                acc += b * b * F.rho[i];
            }
        }
        double weight = 1.0;
        for (std::uint32_t a = 0; a < F.rho.grid().total_dims; ++a)
            weight *= F.rho.grid().spacing;
        drift_sq[k] = acc * weight;  // int |u+v|^2 rho at time k, no half
    }

    const double quad_full = trapezoid(times, drift_sq);
    const double err = trapezoid_error_estimate(drift_sq, dt);
    if (err > coarseness_tol * std::max(std::abs(quad_full), 1e-12))
        throw std::invalid_argument(
            "relative_entropy_fields: time series too coarse for the requested tolerance");

    const EntropyValue h0 = boltzmann_entropy_detail(series.front().rho);
    const EntropyValue hT = boltzmann_entropy_detail(series.back().rho);

    EntropyReport rep;
    rep.H0 = h0.value;
    rep.HT = hT.value;
    rep.kinetic_integral = trapezoid(times, kinetic);
    rep.excluded_mass = std::max(h0.excluded_mass, hT.excluded_mass);
    rep.convention = convention;
    rep.kl_pathwise = std::numeric_limits<double>::quiet_NaN();
    if (convention == EntropyConvention::half_girsanov) {
        rep.kl_quadrature = 0.5 * quad_full;
        rep.kl_decomposed = rep.kinetic_integral + 0.5 * (rep.HT - rep.H0);
    } else {
        rep.kl_quadrature = quad_full;
        rep.kl_decomposed = 2.0 * rep.kinetic_integral + rep.H0 - rep.HT;
    }
    rep.closure_gap = std::abs(rep.kl_quadrature - rep.kl_decomposed);
    return rep;
}

PathwiseKl relative_entropy_pathwise(const PathEnsemble& ensemble, const DriftTrajectory& drift,
                                     EntropyConvention convention) {
    if (ensemble.drift_provenance != drift.provenance)
        throw std::invalid_argument(
            "relative_entropy_pathwise: ensemble and drift provenance mismatch");
    if (ensemble.n_paths == 0)
        throw std::invalid_argument("relative_entropy_pathwise: empty ensemble");
    const double factor = convention == EntropyConvention::half_girsanov ? 0.5 : 1.0;

    const auto K = static_cast<double>(ensemble.n_paths);
    double mean = 0.0;
    for (double a : ensemble.drift_action) mean += factor * a;
    mean /= K;
    double var = 0.0;
    for (double a : ensemble.drift_action) {
        const double d = factor * a - mean;
        var += d * d;
    }
    var = ensemble.n_paths > 1 ? var / (K - 1.0) : 0.0;

    PathwiseKl out;
    out.estimate = mean;
    out.std_error = std::sqrt(var / K);
    out.convention = convention;
    return out;
}

ConvergenceSeries kinetic_convergence_series(const std::vector<std::uint32_t>& N_list,
                                             const std::vector<double>& totals,
                                             double limit_value) {
    if (N_list.size() < 3 || totals.size() != N_list.size())
        throw std::invalid_argument("kinetic_convergence_series: need >= 3 aligned N values");
    ConvergenceSeries out;
    out.N = N_list;
    out.limit = limit_value;
    for (std::size_t i = 0; i < N_list.size(); ++i) {
        out.per_particle.push_back(totals[i] / static_cast<double>(N_list[i]));
        out.gaps.push_back(std::abs(out.per_particle.back() - limit_value));
    }
    out.monotone = true;
    const double slack = 1e-12 * std::max(1.0, out.gaps.front());
    for (std::size_t i = 1; i < out.gaps.size(); ++i)
        if (out.gaps[i] > out.gaps[i - 1] + slack) out.monotone = false;

    bool positive = true;
    for (double gap : out.gaps)
        if (gap <= 1e-15) positive = false;
    if (positive) {
        std::vector<double> Nd;
        for (std::uint32_t n : N_list) Nd.push_back(static_cast<double>(n));
        out.fitted_exponent = fitted_log_slope(Nd, out.gaps);
    } else {
        out.fitted_exponent = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

MonotonicityCheck entropy_monotonicity_check(double kl_conditioned, EntropyConvention conv_cond,
                                             double kl_projected, EntropyConvention conv_proj,
                                             double tolerance) {
    if (conv_cond != conv_proj)
        throw std::invalid_argument("entropy_monotonicity_check: convention mismatch");
    MonotonicityCheck out;
    out.tolerance = tolerance;
    out.gap = kl_projected - kl_conditioned;
    out.holds = kl_conditioned <= kl_projected + tolerance;
    return out;
}

} // namespace nelsonium
