#include "nelsonium/madelung.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nelsonium/errors.hpp"
#include "nelsonium/quadrature.hpp"
#include "nelsonium/spectral.hpp"

namespace nelsonium {

namespace {

double cell_weight(const Grid& g) {
    double w = 1.0;
    for (std::uint32_t a = 0; a < g.total_dims; ++a) w *= g.spacing;
    return w;
}

void check_series(const std::vector<double>& times, std::size_t n_fields, const char* what) {
    if (times.size() != n_fields) {
        std::ostringstream msg;
        msg << what << ": " << times.size() << " times for " << n_fields << " field slices";
        throw std::invalid_argument(msg.str());
    }
    if (times.size() < 3) throw std::invalid_argument(std::string(what) + ": need >= 3 time slices");
    const double dt = times[1] - times[0];
    if (!(dt > 0.0)) throw std::invalid_argument(std::string(what) + ": times must increase");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (std::abs(times[k] - times[k - 1] - dt) > 1e-9 * dt)
            throw std::invalid_argument(std::string(what) + ": time slices must be uniform");
}

} // namespace

MadelungFields extract(const ComplexField& psi, double eps_rel) {
    const Grid& g = psi.grid();
    const std::uint32_t D = g.total_dims;
    const std::size_t n = g.size();

    MadelungFields out;
    out.rho = psi.abs_squared();
    out.eps_node = eps_rel * out.rho.max();
    out.node_mask.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) out.node_mask[i] = out.rho[i] < out.eps_node;

    std::vector<std::vector<double>> jc(D, std::vector<double>(n));
    std::vector<std::vector<double>> uc(D, std::vector<double>(n));
    std::vector<std::vector<double>> vc(D, std::vector<double>(n));
    for (std::uint32_t a = 0; a < D; ++a) {
        const ComplexField grad = spectral_gradient(psi, a);
        for (std::size_t i = 0; i < n; ++i) {
            const cplx gz = grad[i];
            if (!std::isfinite(gz.real()) || !std::isfinite(gz.imag()))
                throw numerical_breach("extract: non-finite wavefunction gradient");
            const cplx pz = psi[i];
            jc[a][i] = std::imag(std::conj(pz) * gz);
            if (out.node_mask[i]) {
                uc[a][i] = 0.0;
                vc[a][i] = 0.0;
            } else {
                const cplx log_grad = gz / pz;
                uc[a][i] = log_grad.real();
                vc[a][i] = log_grad.imag();
            }
        }
    }
    out.j = VectorField(g, std::move(jc));
    out.u = VectorField(g, std::move(uc));
    out.v = VectorField(g, std::move(vc));

    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (out.node_mask[i]) mass += out.rho[i];
    out.node_mass = mass * cell_weight(g);
    return out;
}

MarginalSet marginalize(const MadelungFields& fields, std::uint32_t n, double max_node_mass) {
    const Grid& g = fields.rho.grid();
    const std::uint32_t N = g.total_dims;
    if (n < 1 || n >= N) throw std::invalid_argument("marginalize: need 1 <= n < N");

    std::vector<std::uint32_t> tail;
    for (std::uint32_t a = n; a < N; ++a) tail.push_back(a);

    MarginalSet out;
    out.n = n;
    out.rho = integrate_axes(fields.rho, tail);
    const Grid& gn = out.rho.grid();

    // Same relative threshold the full-grid mask was built with.
    const double eps_rel = fields.rho.max() > 0.0 ? fields.eps_node / fields.rho.max() : kNodeEpsRel;
    out.eps_node = eps_rel * out.rho.max();
    out.node_mask.assign(out.rho.size(), false);
    double mask_mass = 0.0;
    for (std::size_t i = 0; i < out.rho.size(); ++i) {
        out.node_mask[i] = out.rho[i] < out.eps_node;
        if (out.node_mask[i]) mask_mass += out.rho[i];
    }
    out.node_mass = mask_mass * cell_weight(gn);
    if (out.node_mass > max_node_mass) {
        std::ostringstream msg;
        msg << "marginalize: node mask carries mass " << out.node_mass << " (limit "
            << max_node_mass << ")";
        throw numerical_breach(msg.str());
    }

    std::vector<std::vector<double>> jc(n), uc(n), vc(n);
    for (std::uint32_t a = 0; a < n; ++a) {
        const RealField ja = integrate_axes(fields.j.component_field(a), tail);
        const RealField ua_num = integrate_axes(
            multiply(fields.u.component_field(a), fields.rho), tail);
        jc[a].resize(gn.size());
        uc[a].resize(gn.size());
        vc[a].resize(gn.size());
        for (std::size_t i = 0; i < gn.size(); ++i) {
            jc[a][i] = ja[i];
            if (out.node_mask[i]) {
                uc[a][i] = 0.0;
                vc[a][i] = 0.0;
            } else {
                uc[a][i] = ua_num[i] / out.rho[i];
                vc[a][i] = ja[i] / out.rho[i];
            }
        }
    }
    out.j = VectorField(gn, std::move(jc));
    out.u = VectorField(gn, std::move(uc));
    out.v = VectorField(gn, std::move(vc));
    return out;
}

VectorField conditional_drift(const MadelungFields& fields, std::uint32_t n) {
    const MarginalSet m = marginalize(fields, n);
    return add(m.u, m.v);
}

ContinuityResidual continuity_residual(const std::vector<double>& times,
                                       const std::vector<RealField>& rho_series,
                                       const std::vector<VectorField>& v_series) {
    check_series(times, rho_series.size(), "continuity_residual");
    if (v_series.size() != rho_series.size())
        throw std::invalid_argument("continuity_residual: rho/v series misaligned");
    const Grid& g = rho_series[0].grid();
    for (std::size_t k = 0; k < rho_series.size(); ++k)
        if (!(rho_series[k].grid() == g) || !(v_series[k].grid() == g))
            throw std::invalid_argument("continuity_residual: grid mismatch in series");

    const std::size_t S = times.size();
    const double dt = times[1] - times[0];
    const std::uint32_t D = g.total_dims;

    // Current density per slice: j = rho v (v is zero on the node mask, where
    // the true current is below the mask floor anyway).
    std::vector<VectorField> j_series;
    j_series.reserve(S);
    for (std::size_t k = 0; k < S; ++k) {
        std::vector<std::vector<double>> jc(D, std::vector<double>(g.size()));
        for (std::uint32_t a = 0; a < D; ++a)
            for (std::size_t i = 0; i < g.size(); ++i)
                jc[a][i] = rho_series[k][i] * v_series[k].component(a)[i];
        j_series.emplace_back(g, std::move(jc));
    }

    ContinuityResidual out;
    out.probe_battery = ProbeBattery::id();

    // Weak form: sup_phi | int phi rho_T - int phi rho_0 - int_t int grad(phi).j |.
    const ProbeBattery battery(g);
    for (std::size_t p = 0; p < battery.size(); ++p) {
        const VectorField grad_phi = battery.gradient_probe(p);
        std::vector<double> inner(S, 0.0);
        for (std::size_t k = 0; k < S; ++k) {
            double s = 0.0;
            for (std::uint32_t a = 0; a < D; ++a) {
                const std::vector<double>& gp = grad_phi.component(a);
                const std::vector<double>& jj = j_series[k].component(a);
                for (std::size_t i = 0; i < g.size(); ++i) s += gp[i] * jj[i];
            }
            inner[k] = s * cell_weight(g);
        }
        double time_integral = 0.0;
        for (std::size_t k = 0; k + 1 < S; ++k) time_integral += 0.5 * dt * (inner[k] + inner[k + 1]);
        const double boundary = integrate(multiply(battery.probe(p), rho_series[S - 1])) -
                                integrate(multiply(battery.probe(p), rho_series[0]));
        out.weak = std::max(out.weak, std::abs(boundary - time_integral));
    }

    // Strong form: || d_t rho + div j ||_{L2(dx dt)} over interior slices.
    double acc = 0.0;
    for (std::size_t k = 1; k + 1 < S; ++k) {
        RealField div_j = RealField::zeros(g);
        for (std::uint32_t a = 0; a < D; ++a)
            div_j = add(div_j, spectral_gradient(j_series[k].component_field(a), a));
        double slice = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double r = (rho_series[k + 1][i] - rho_series[k - 1][i]) / (2.0 * dt) + div_j[i];
            slice += r * r;
        }
        acc += slice * cell_weight(g) * dt;
    }
    out.strong = std::sqrt(acc);
    out.excluded_mass = 0.0;
    return out;
}

namespace {

// Velocity gradient d_b v_a = (d_b j_a - v_a d_b rho) / rho, formed from the
// smooth j and rho fields only; zeroed where rho is below the clamp floor.
struct SliceDerivatives {
    std::vector<RealField> drho;       // d_a rho
    RealField lap_rho;                 // sum_a d_a^2 rho
    std::vector<RealField> dlap_rho;   // d_a lap rho, a < n_keep
    std::vector<std::vector<RealField>> d2rho;  // d_a d_b rho, a < n_keep, all b
    std::vector<std::vector<RealField>> dj;     // d_b j_a, a < n_keep, all b
};

SliceDerivatives slice_derivatives(const RealField& rho, const VectorField& j,
                                   std::uint32_t n_keep) {
    const Grid& g = rho.grid();
    const std::uint32_t D = g.total_dims;
    SliceDerivatives out;
    out.drho.reserve(D);
    for (std::uint32_t a = 0; a < D; ++a) out.drho.push_back(spectral_gradient(rho, a));
    out.lap_rho = spectral_laplacian(rho);
    out.dlap_rho.reserve(n_keep);
    out.d2rho.resize(n_keep);
    out.dj.resize(n_keep);
    for (std::uint32_t a = 0; a < n_keep; ++a) {
        out.dlap_rho.push_back(spectral_gradient(out.lap_rho, a));
        out.d2rho[a].reserve(D);
        out.dj[a].reserve(D);
        for (std::uint32_t b = 0; b < D; ++b) {
            out.d2rho[a].push_back(spectral_gradient(out.drho[a], b));
            out.dj[a].push_back(spectral_gradient(j.component_field(a), b));
        }
    }
    return out;
}

// d_a (u^2 + div u) expanded in rho derivatives:
//   u^2 + div u = lap(rho)/(2 rho) - |grad rho|^2/(4 rho^2)
// so the gradient avoids ever differentiating the masked u field.
double quantum_force_at(const SliceDerivatives& d, const RealField& rho, std::uint32_t a,
                        std::size_t i, std::uint32_t D) {
    const double r = rho[i];
    double grad2 = 0.0;
    double cross = 0.0;
    for (std::uint32_t b = 0; b < D; ++b) {
        const double db = d.drho[b][i];
        grad2 += db * db;
        cross += db * d.d2rho[a][b][i];
    }
    return d.dlap_rho[a][i] / (2.0 * r) - d.lap_rho[i] * d.drho[a][i] / (2.0 * r * r) -
           cross / (2.0 * r * r) + grad2 * d.drho[a][i] / (2.0 * r * r * r);
}

} // namespace

MadelungResidualReport madelung_residual(const std::vector<double>& times,
                                         const std::vector<MadelungFields>& series,
                                         MadelungPotentialMode mode,
                                         const VectorField* grad_V_ext,
                                         const PairPotential* pot) {
    check_series(times, series.size(), "madelung_residual");
    const Grid& g = series[0].rho.grid();
    const std::uint32_t D = g.total_dims;
    const double dt = times[1] - times[0];

    const bool hartree = mode != MadelungPotentialMode::external_V;
    if (mode == MadelungPotentialMode::external_V && grad_V_ext == nullptr)
        throw std::invalid_argument("madelung_residual: external_V mode needs grad_V_ext");
    if (hartree && pot == nullptr)
        throw std::invalid_argument("madelung_residual: hartree modes need the pair potential");
    if (hartree && D != 1)
        throw std::invalid_argument("madelung_residual: hartree modes expect a 1-axis grid");
    const double conv_coeff = mode == MadelungPotentialMode::hartree_doubled ? 2.0 : 1.0;

    std::vector<cplx> kernel_fft;
    if (hartree) kernel_fft = convolution_kernel_fft(pair_kernel_field(g, *pot));

    MadelungResidualReport report;
    report.mode = mode;
    double acc = 0.0;
    for (std::size_t k = 1; k + 1 < times.size(); ++k) {
        const MadelungFields& f = series[k];
        const double rho_max = f.rho.max();
        const double clamp = kIntegrandClampRel * rho_max;
        const double eval = kEvalThresholdRel * rho_max;
        const SliceDerivatives d = slice_derivatives(f.rho, f.j, D);

        std::vector<RealField> force;
        if (hartree) {
            force.push_back(scale(
                periodic_convolution_with_kernel(d.drho[0], kernel_fft), conv_coeff));
        }

        double slice = 0.0;
        double excluded = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double r = f.rho[i];
            if (r < eval) {
                excluded += r;
                continue;
            }
            double point = 0.0;
            for (std::uint32_t a = 0; a < D; ++a) {
                const double dtv =
                    (series[k + 1].v.component(a)[i] - series[k - 1].v.component(a)[i]) /
                    (2.0 * dt);
                double advec = 0.0;
                for (std::uint32_t b = 0; b < D; ++b) {
                    const double dv_ba =
                        r < clamp ? 0.0
                                  : (d.dj[a][b][i] - f.v.component(a)[i] * d.drho[b][i]) / r;
                    advec += f.v.component(b)[i] * dv_ba;
                }
                double fa = 0.0;
                if (grad_V_ext != nullptr) fa += grad_V_ext->component(a)[i];
                if (hartree) fa += force[a][i];
                const double R = dtv + advec - 0.5 * quantum_force_at(d, f.rho, a, i, D) + fa;
                point += R * R;
            }
            slice += point * r;
        }
        acc += slice * cell_weight(g) * dt;
        report.excluded_mass = std::max(report.excluded_mass, excluded * cell_weight(g));
    }
    report.value = std::sqrt(acc);
    return report;
}

double finite_energy_value(const MadelungFields& fields) {
    const Grid& g = fields.rho.grid();
    double sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double uv2 = 0.0;
        for (std::uint32_t a = 0; a < g.total_dims; ++a) {
            const double ua = fields.u.component(a)[i];
            const double va = fields.v.component(a)[i];
            uv2 += ua * ua + va * va;
        }
        sum += uv2 * fields.rho[i];
    }
    return sum * cell_weight(g);
}

double weighted_l2_norm(const VectorField& w, const RealField& rho) {
    if (!(w.grid() == rho.grid())) throw std::invalid_argument("weighted_l2_norm: grid mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        double n2 = 0.0;
        for (std::uint32_t a = 0; a < w.components(); ++a) {
            const double wa = w.component(a)[i];
            n2 += wa * wa;
        }
        sum += n2 * rho[i];
    }
    return std::sqrt(sum * cell_weight(rho.grid()));
}

double max_curl_off_nodes(const VectorField& v, const std::vector<bool>& node_mask) {
    const Grid& g = v.grid();
    const std::uint32_t D = g.total_dims;
    if (D < 2) return 0.0;
    if (node_mask.size() != g.size())
        throw std::invalid_argument("max_curl_off_nodes: mask size mismatch");

    // Central difference along one axis at a flat index, periodic wrap.
    const std::uint32_t M = g.points_per_axis;
    auto shifted = [&](std::size_t flat, std::uint32_t axis, int step) {
        const std::size_t stride = g.stride(axis);
        const std::size_t pos = (flat / stride) % M;
        const std::size_t new_pos = (pos + static_cast<std::size_t>(static_cast<int>(M) + step)) % M;
        return flat - pos * stride + new_pos * stride;
    };

    double worst = 0.0;
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        if (node_mask[flat]) continue;
        bool stencil_clear = true;
        for (std::uint32_t a = 0; a < D && stencil_clear; ++a)
            for (int s = -1; s <= 1 && stencil_clear; s += 2)
                if (node_mask[shifted(flat, a, s)]) stencil_clear = false;
        if (!stencil_clear) continue;
        for (std::uint32_t a = 0; a < D; ++a) {
            for (std::uint32_t b = a + 1; b < D; ++b) {
                const double dva_db = (v.component(a)[shifted(flat, b, 1)] -
                                       v.component(a)[shifted(flat, b, -1)]) /
                                      (2.0 * g.spacing);
                const double dvb_da = (v.component(b)[shifted(flat, a, 1)] -
                                       v.component(b)[shifted(flat, a, -1)]) /
                                      (2.0 * g.spacing);
                worst = std::max(worst, std::abs(dva_db - dvb_da));
            }
        }
    }
    return worst;
}

} // namespace nelsonium
