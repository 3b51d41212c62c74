#include "nelsonium/hierarchy.hpp"

#include <cmath>
#include <stdexcept>

#include "nelsonium/quadrature.hpp"
#include "nelsonium/spectral.hpp"

namespace nelsonium {

namespace {

double cell_weight(const Grid& g) {
    double w = 1.0;
    for (std::uint32_t a = 0; a < g.total_dims; ++a) w *= g.spacing;
    return w;
}

// Full-grid spectral derivatives feeding the conditional integrands. Only
// smooth fields (rho, j) are differentiated; velocity gradients come from
// d_b v_a = (d_b j_a - v_a d_b rho)/rho with a floor clamp.
struct DerivBundle {
    std::vector<RealField> drho;                 // all axes
    RealField lap_rho;
    std::vector<RealField> dlap_rho;             // kept axes
    std::vector<std::vector<RealField>> d2rho;   // kept x all
    std::vector<std::vector<RealField>> dj_keep; // kept x all
    std::vector<RealField> dj_diag;              // d_b j_b, all axes
};

DerivBundle make_bundle(const RealField& rho, const VectorField& j, std::uint32_t n_keep) {
    const Grid& g = rho.grid();
    const std::uint32_t D = g.total_dims;
    DerivBundle out;
    for (std::uint32_t b = 0; b < D; ++b) out.drho.push_back(spectral_gradient(rho, b));
    out.lap_rho = spectral_laplacian(rho);
    out.d2rho.resize(n_keep);
    out.dj_keep.resize(n_keep);
    for (std::uint32_t a = 0; a < n_keep; ++a) {
        out.dlap_rho.push_back(spectral_gradient(out.lap_rho, a));
        for (std::uint32_t b = 0; b < D; ++b) {
            out.d2rho[a].push_back(spectral_gradient(out.drho[a], b));
            out.dj_keep[a].push_back(spectral_gradient(j.component_field(a), b));
        }
    }
    for (std::uint32_t b = 0; b < D; ++b)
        out.dj_diag.push_back(spectral_gradient(j.component_field(b), b));
    return out;
}

double quantum_force_at(const DerivBundle& d, const RealField& rho, std::uint32_t a,
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

struct TermAccumulator {
    double dtv = 0.0;
    double cond_transport = 0.0;
    double counterterm = 0.0;
    double cond_quantum = 0.0;
    double intra = 0.0;
    double tail = 0.0;
    double residual = 0.0;
};

HierarchyReport evaluate_hierarchy(std::uint32_t N_label, double intra_coeff, double tail_coeff,
                                   std::uint32_t n, const std::vector<double>& times,
                                   const std::vector<MadelungFields>& full_series,
                                   const std::vector<MarginalSet>& marginal_series,
                                   const std::vector<RealField>& rho_np1_series,
                                   const PairPotential& pot) {
    if (times.size() < 3) throw std::invalid_argument("hierarchy residual: need >= 3 time slices");
    if (full_series.size() != times.size() || marginal_series.size() != times.size() ||
        rho_np1_series.size() != times.size())
        throw std::invalid_argument("hierarchy residual: series misaligned");
    const double dt = times[1] - times[0];
    for (std::size_t k = 1; k < times.size(); ++k)
        if (std::abs(times[k] - times[k - 1] - dt) > 1e-9 * dt)
            throw std::invalid_argument("hierarchy residual: time slices must be uniform");

    const Grid& gF = full_series[0].rho.grid();
    const Grid& gn = marginal_series[0].rho.grid();
    const Grid& gp = rho_np1_series[0].grid();
    const std::uint32_t D = gF.total_dims;
    if (gn.total_dims != n || gp.total_dims != n + 1 || D < n + 1)
        throw std::invalid_argument("hierarchy residual: dimension mismatch across inputs");
    if (gn.points_per_axis != gF.points_per_axis || gp.points_per_axis != gF.points_per_axis ||
        gn.box_length != gF.box_length || gp.box_length != gF.box_length)
        throw std::invalid_argument("hierarchy residual: grids must share box and resolution");
    const std::uint32_t M = gF.points_per_axis;

    std::vector<std::uint32_t> tail_axes;
    for (std::uint32_t a = n; a < D; ++a) tail_axes.push_back(a);

    TermAccumulator acc;
    double cont_acc = 0.0;
    double worst_excluded = 0.0;

    std::vector<std::uint32_t> idx(n);
    for (std::size_t k = 1; k + 1 < times.size(); ++k) {
        const MadelungFields& F = full_series[k];
        const MarginalSet& Mk = marginal_series[k];
        const RealField& rho_np1 = rho_np1_series[k];

        const double full_clamp = kIntegrandClampRel * F.rho.max();
        const double np1_clamp = kIntegrandClampRel * rho_np1.max();
        const double eval = kEvalThresholdRel * Mk.rho.max();

        const DerivBundle dF = make_bundle(F.rho, F.j, n);

        // Conditional transport and quantum integrands on the full grid.
        std::vector<RealField> cond_transport_num, cond_quantum_num;
        for (std::uint32_t a = 0; a < n; ++a) {
            std::vector<double> tI(gF.size(), 0.0), qI(gF.size(), 0.0);
            for (std::size_t i = 0; i < gF.size(); ++i) {
                const double r = F.rho[i];
                if (r < full_clamp) continue;
                double div_v = 0.0;
                double vu = 0.0;
                double advec = 0.0;
                for (std::uint32_t b = 0; b < D; ++b) {
                    const double vb = F.v.component(b)[i];
                    const double ub = F.u.component(b)[i];
                    div_v += (dF.dj_diag[b][i] - vb * dF.drho[b][i]) / r;
                    vu += vb * ub;
                    advec += vb * (dF.dj_keep[a][b][i] - F.v.component(a)[i] * dF.drho[b][i]) / r;
                }
                const double va = F.v.component(a)[i];
                tI[i] = (advec + va * (div_v + 2.0 * vu)) * r;
                qI[i] = quantum_force_at(dF, F.rho, a, i, D) * r;
            }
            cond_transport_num.push_back(
                integrate_axes(RealField(gF, std::move(tI)), tail_axes));
            cond_quantum_num.push_back(integrate_axes(RealField(gF, std::move(qI)), tail_axes));
        }

        // Marginal-level derivatives for the counterterm and continuity line.
        std::vector<RealField> drho_n, dj_n_diag;
        for (std::uint32_t b = 0; b < n; ++b) {
            drho_n.push_back(spectral_gradient(Mk.rho, b));
            dj_n_diag.push_back(spectral_gradient(Mk.j.component_field(b), b));
        }

        double excluded = 0.0;
        TermAccumulator slice;
        for (std::size_t i = 0; i < gn.size(); ++i) {
            const double rn = Mk.rho[i];
            if (rn < eval) {
                excluded += rn;
                continue;
            }
            gn.unflatten(i, idx.data());

            double div_vn = 0.0;
            double vu_n = 0.0;
            for (std::uint32_t b = 0; b < n; ++b) {
                div_vn += (dj_n_diag[b][i] - Mk.v.component(b)[i] * drho_n[b][i]) / rn;
                vu_n += Mk.v.component(b)[i] * Mk.u.component(b)[i];
            }

            for (std::uint32_t a = 0; a < n; ++a) {
                const double xa = gn.node(idx[a]);
                const double dtv = (marginal_series[k + 1].v.component(a)[i] -
                                    marginal_series[k - 1].v.component(a)[i]) /
                                   (2.0 * dt);
                const double cond_t = cond_transport_num[a][i] / rn;
                const double ct = Mk.v.component(a)[i] * (div_vn + 2.0 * vu_n);
                const double cond_q = 0.5 * cond_quantum_num[a][i] / rn;

                double intra = 0.0;
                if (intra_coeff != 0.0)
                    for (std::uint32_t b = 0; b < n; ++b)
                        if (b != a)
                            intra += intra_coeff *
                                     pot.derivative(periodic_difference(
                                         xa, gn.node(idx[b]), gn.box_length));

                double tail_int = 0.0;
                for (std::uint32_t z = 0; z < M; ++z) {
                    const double w = rho_np1[i * M + z];
                    if (w < np1_clamp) continue;
                    tail_int += pot.derivative(periodic_difference(xa, gp.node(z), gp.box_length)) * w;
                }
                const double tail = tail_coeff * tail_int * gp.spacing / rn;

                const double R = dtv + cond_t - ct - cond_q + intra + tail;
                const double w = rn;
                slice.dtv += dtv * dtv * w;
                slice.cond_transport += cond_t * cond_t * w;
                slice.counterterm += ct * ct * w;
                slice.cond_quantum += cond_q * cond_q * w;
                slice.intra += intra * intra * w;
                slice.tail += tail * tail * w;
                slice.residual += R * R * w;
            }
        }
        const double wk = cell_weight(gn) * dt;
        acc.dtv += slice.dtv * wk;
        acc.cond_transport += slice.cond_transport * wk;
        acc.counterterm += slice.counterterm * wk;
        acc.cond_quantum += slice.cond_quantum * wk;
        acc.intra += slice.intra * wk;
        acc.tail += slice.tail * wk;
        acc.residual += slice.residual * wk;
        worst_excluded = std::max(worst_excluded, excluded * cell_weight(gn));

        // Continuity line of the hierarchy.
        RealField div_jn = RealField::zeros(gn);
        for (std::uint32_t b = 0; b < n; ++b) div_jn = add(div_jn, dj_n_diag[b]);
        double cont = 0.0;
        for (std::size_t i = 0; i < gn.size(); ++i) {
            const double r = (marginal_series[k + 1].rho[i] - marginal_series[k - 1].rho[i]) /
                                 (2.0 * dt) +
                             div_jn[i];
            cont += r * r;
        }
        cont_acc += cont * cell_weight(gn) * dt;
    }

    HierarchyReport report;
    report.N = N_label;
    report.n = n;
    report.velocity_residual = std::sqrt(acc.residual);
    report.continuity_residual = std::sqrt(cont_acc);
    report.excluded_mass = worst_excluded;
    report.terms = {
        {"dt_v", std::sqrt(acc.dtv)},
        {"conditional_transport", std::sqrt(acc.cond_transport)},
        {"transport_counterterm", std::sqrt(acc.counterterm)},
        {"conditional_quantum", std::sqrt(acc.cond_quantum)},
        {"potential_intra_block", std::sqrt(acc.intra)},
        {"potential_tail", std::sqrt(acc.tail)},
    };
    return report;
}

} // namespace

HierarchyReport finite_hierarchy_residual(std::uint32_t N, std::uint32_t n,
                                          const std::vector<double>& times,
                                          const std::vector<MadelungFields>& full_series,
                                          const std::vector<MarginalSet>& marginal_series,
                                          const std::vector<RealField>& rho_np1_series,
                                          const PairPotential& pot) {
    if (n < 1 || n >= N) throw std::invalid_argument("finite_hierarchy_residual: need 1 <= n < N");
    if (!full_series.empty() && full_series[0].rho.grid().total_dims != N)
        throw std::invalid_argument("finite_hierarchy_residual: full fields must have N axes");
    const double Nf = static_cast<double>(N);
    return evaluate_hierarchy(N, 1.0 / Nf, (Nf - static_cast<double>(n)) / Nf, n, times,
                              full_series, marginal_series, rho_np1_series, pot);
}

HierarchyReport infinite_hierarchy_residual(std::uint32_t n, const std::vector<double>& times,
                                            const std::vector<ComplexField>& psi_series,
                                            const PairPotential& pot) {
    if (n < 1) throw std::invalid_argument("infinite_hierarchy_residual: need n >= 1");
    std::vector<MadelungFields> full;
    std::vector<MarginalSet> marginal;
    std::vector<RealField> rho_np1;
    full.reserve(psi_series.size());
    for (const ComplexField& phi : psi_series) {
        if (phi.grid().total_dims != 1)
            throw std::invalid_argument("infinite_hierarchy_residual: psi series must be one-body");
        full.push_back(extract(tensor_power(phi, n + 1)));
        marginal.push_back(marginalize(full.back(), n));
        rho_np1.push_back(full.back().rho);
    }
    return evaluate_hierarchy(0, 0.0, 1.0, n, times, full, marginal, rho_np1, pot);
}

} // namespace nelsonium
