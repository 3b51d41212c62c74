#ifndef NELSONIUM_HIERARCHY_HPP
#define NELSONIUM_HIERARCHY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nelsonium/madelung.hpp"
#include "nelsonium/potentials.hpp"

namespace nelsonium {

struct HierarchyTerm {
    std::string name;
    double magnitude = 0.0;  // L2(rho_n dx dt) over the interior slices
};

struct HierarchyReport {
    std::uint32_t N = 0;  // 0 marks the infinite (mean-field limit) hierarchy
    std::uint32_t n = 0;
    double velocity_residual = 0.0;    // L2(rho_n dx dt)
    double continuity_residual = 0.0;  // L2(dx dt) of d_t rho_n + div j_n
    double excluded_mass = 0.0;
    std::vector<HierarchyTerm> terms;
};

// Velocity line implemented (moving everything left):
//   d_t v_{N,n,a}
//   + E[(v.grad)v_a + v_a(div v + 2 v.u) | x]
//   - v_{N,n,a}(div v_{N,n} + 2 v_{N,n}.u_{N,n})
//   - (1/2) E[d_a(u^2 + div u) | x]
//   + (1/N) sum_{k<=n, k!=a} V'(x_a - x_k)
//   + c_tail int V'(x_a - z) rho_{N,n+1}(x,z)/rho_{N,n}(x) dz      = residual_a
// with c_tail = (N-n)/N, alongside the continuity line
// d_t rho_{N,n} = -div j_{N,n}. Conditional expectations integrate the full
// fields against rho_N; the per-term report records each line's magnitude.
HierarchyReport finite_hierarchy_residual(std::uint32_t N, std::uint32_t n,
                                          const std::vector<double>& times,
                                          const std::vector<MadelungFields>& full_series,
                                          const std::vector<MarginalSet>& marginal_series,
                                          const std::vector<RealField>& rho_np1_series,
                                          const PairPotential& pot);

// Formal mean-field limit of the same system: the intra-block sum drops, the
// tail coefficient becomes 1, and the conditional weight is the normalized
// rho_{n+1}/rho_n. Evaluated on tensor powers of a one-body trajectory, the
// machinery is shared with the finite case via an (n+1)-body tensor state.
HierarchyReport infinite_hierarchy_residual(std::uint32_t n, const std::vector<double>& times,
                                            const std::vector<ComplexField>& psi_series,
                                            const PairPotential& pot);

} // namespace nelsonium

#endif
