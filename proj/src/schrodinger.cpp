#include "nelsonium/schrodinger.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nelsonium/errors.hpp"
#include "nelsonium/fft.hpp"
#include "nelsonium/quadrature.hpp"
#include "nelsonium/spectral.hpp"
#include "nelsonium/thermo.hpp"

namespace nelsonium {

namespace {

std::vector<double> ksq_table(const Grid& g) {
    std::vector<double> k2(g.size());
    std::vector<std::uint32_t> idx(g.total_dims);
    for (std::size_t flat = 0; flat < k2.size(); ++flat) {
        g.unflatten(flat, idx.data());
        double s = 0.0;
        for (std::uint32_t a = 0; a < g.total_dims; ++a) {
            const double k = g.wavenumber(idx[a]);
            s += k * k;
        }
        k2[flat] = s;
    }
    return k2;
}

// Potential half-step and kinetic full-step phase applications.
void apply_potential_half(std::vector<cplx>& psi, const std::vector<double>& W, double dt) {
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= std::polar(1.0, -0.5 * dt * W[i]);
}

void apply_kinetic(const Grid& g, std::vector<cplx>& psi, const std::vector<cplx>& kin_phase) {
    fft_forward(g, psi.data());
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= kin_phase[i];
    fft_inverse(g, psi.data());
}

std::vector<cplx> kinetic_phase_table(const Grid& g, double dt) {
    const std::vector<double> k2 = ksq_table(g);
    std::vector<cplx> phase(k2.size());
    for (std::size_t i = 0; i < k2.size(); ++i) phase[i] = std::polar(1.0, -0.5 * dt * k2[i]);
    return phase;
}

// Caches everything reusable across steps of one trajectory.
class Stepper {
  public:
    Stepper(const SchrodingerProblem& problem)
        : problem_(problem), kin_phase_(kinetic_phase_table(problem.grid, problem.dt)) {
        const Grid& g = problem.grid;
        trap_ = (problem.trap_omega != 0.0) ? assemble_trap(g, problem.trap_omega)
                                            : RealField::zeros(g);
        if (problem_.mode == SolverMode::linear_nbody) {
            W_ = add(trap_, assemble_nbody_potential(g, problem.potential, problem.n_particles));
        } else {
            kernel_fft_ = convolution_kernel_fft(pair_kernel_field(g, problem.potential));
        }
    }

    void step(std::vector<cplx>& psi) {
        if (problem_.mode == SolverMode::linear_nbody) {
            apply_potential_half(psi, W_.values(), problem_.dt);
            apply_kinetic(problem_.grid, psi, kin_phase_);
            apply_potential_half(psi, W_.values(), problem_.dt);
        } else {
            apply_potential_half(psi, hartree_W(psi), problem_.dt);
            apply_kinetic(problem_.grid, psi, kin_phase_);
            apply_potential_half(psi, hartree_W(psi), problem_.dt);
        }
    }

    // Energy of the conserved functional, using the cached kernels.
    double energy(const ComplexField& psi) const {
        const double K = kinetic_energy(psi);
        const RealField rho = psi.abs_squared();
        if (problem_.mode == SolverMode::linear_nbody) return K + integrate(multiply(W_, rho));
        const RealField conv = periodic_convolution_with_kernel(rho, kernel_fft_);
        return K + integrate(multiply(trap_, rho)) + 0.5 * integrate(multiply(conv, rho));
    }

  private:
    std::vector<double> hartree_W(const std::vector<cplx>& psi) {
        const Grid& g = problem_.grid;
        std::vector<double> rho(psi.size());
        for (std::size_t i = 0; i < psi.size(); ++i) rho[i] = std::norm(psi[i]);
        const RealField conv =
            periodic_convolution_with_kernel(RealField(g, std::move(rho)), kernel_fft_);
        std::vector<double> W(conv.values());
        for (std::size_t i = 0; i < W.size(); ++i) W[i] += trap_[i];
        return W;
    }

    const SchrodingerProblem& problem_;
    std::vector<cplx> kin_phase_;
    RealField trap_;
    RealField W_;
    std::vector<cplx> kernel_fft_;
};

void check_mode_dims(const SchrodingerProblem& problem) {
    const std::uint32_t D = problem.grid.total_dims;
    if (problem.mode == SolverMode::hartree && D != 1)
        throw std::invalid_argument("hartree mode requires a 1-axis grid");
    if (problem.mode == SolverMode::linear_nbody && D != problem.n_particles)
        throw std::invalid_argument("linear_nbody mode requires grid dims == n_particles");
    if (!(problem.dt > 0.0) || problem.T < problem.dt)
        throw std::invalid_argument("need dt > 0 and T >= dt");
}

} // namespace

ComplexField step_strang(const ComplexField& psi, const RealField& W, double dt) {
    if (!(psi.grid() == W.grid())) throw std::invalid_argument("step_strang: grid mismatch");
    std::vector<cplx> work(psi.values());
    const std::vector<cplx> kin = kinetic_phase_table(psi.grid(), dt);
    apply_potential_half(work, W.values(), dt);
    apply_kinetic(psi.grid(), work, kin);
    apply_potential_half(work, W.values(), dt);
    return ComplexField(psi.grid(), std::move(work));
}

ComplexField step_strang_hartree(const ComplexField& psi, const std::vector<cplx>& kernel_fft,
                                 const RealField& trap, double dt) {
    const Grid& g = psi.grid();
    if (g.total_dims != 1) throw std::invalid_argument("step_strang_hartree: expects a 1-axis grid");
    std::vector<cplx> work(psi.values());
    const std::vector<cplx> kin = kinetic_phase_table(g, dt);
    auto half = [&](std::vector<cplx>& p) {
        std::vector<double> rho(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) rho[i] = std::norm(p[i]);
        const RealField conv =
            periodic_convolution_with_kernel(RealField(g, std::move(rho)), kernel_fft);
        for (std::size_t i = 0; i < p.size(); ++i)
            p[i] *= std::polar(1.0, -0.5 * dt * (conv[i] + trap[i]));
    };
    half(work);
    apply_kinetic(g, work, kin);
    half(work);
    return ComplexField(g, std::move(work));
}

double total_energy(const SchrodingerProblem& problem, const ComplexField& psi) {
    check_mode_dims(problem);
    return Stepper(problem).energy(psi);
}

EvolveResult evolve(const SchrodingerProblem& problem, const ComplexField& psi0,
                    const std::vector<double>& sample_times) {
    check_mode_dims(problem);
    if (!(psi0.grid() == problem.grid)) throw std::invalid_argument("evolve: psi0 grid mismatch");

    const auto n_steps = static_cast<std::int64_t>(std::llround(problem.T / problem.dt));
    if (std::abs(static_cast<double>(n_steps) * problem.dt - problem.T) > 1e-9 * std::max(1.0, problem.T))
        throw std::invalid_argument("evolve: T must sit on the dt lattice");

    std::vector<std::int64_t> sample_steps;
    for (double t : sample_times) {
        const auto s = static_cast<std::int64_t>(std::llround(t / problem.dt));
        if (s < 0 || s > n_steps || std::abs(static_cast<double>(s) * problem.dt - t) > 1e-9 * std::max(1.0, problem.T))
            throw std::invalid_argument("evolve: sample times must sit on the dt lattice within [0, T]");
        if (!sample_steps.empty() && s <= sample_steps.back())
            throw std::invalid_argument("evolve: sample times must be strictly increasing");
        sample_steps.push_back(s);
    }

    Stepper stepper(problem);
    std::vector<cplx> psi(psi0.values());
    EvolveResult result;

    const double E0 = stepper.energy(psi0);
    auto record = [&](std::int64_t step) {
        ComplexField state(problem.grid, psi);
        const double norm = state.norm();
        const double t = static_cast<double>(step) * problem.dt;
        if (!std::isfinite(norm)) {
            std::ostringstream msg;
            msg << "state became non-finite at step " << step << " (t = " << t << ")";
            throw numerical_breach(msg.str());
        }
        const double E = stepper.energy(state);
        if (std::abs(norm - 1.0) > problem.norm_breach) {
            std::ostringstream msg;
            msg << "norm drifted to " << norm << " at t = " << t;
            throw numerical_breach(msg.str());
        }
        if (std::abs(E - E0) > problem.energy_breach * std::max(1.0, std::abs(E0))) {
            std::ostringstream msg;
            msg << "energy drifted from " << E0 << " to " << E << " at t = " << t;
            throw numerical_breach(msg.str());
        }
        result.times.push_back(t);
        result.states.push_back(std::move(state));
        result.conservation.push_back({t, norm, E});
    };

    std::size_t next_sample = 0;
    if (next_sample < sample_steps.size() && sample_steps[next_sample] == 0) {
        record(0);
        ++next_sample;
    }
    for (std::int64_t step = 1; step <= n_steps; ++step) {
        stepper.step(psi);
        // Cheap per-step blow-up sentinel; full norm check happens at samples.
        if (!std::isfinite(psi[0].real())) {
            std::ostringstream msg;
            msg << "state became non-finite at step " << step;
            throw numerical_breach(msg.str());
        }
        if (next_sample < sample_steps.size() && sample_steps[next_sample] == step) {
            record(step);
            ++next_sample;
        }
    }
    return result;
}

} // namespace nelsonium
