#ifndef NELSONIUM_DIFFUSION_HPP
#define NELSONIUM_DIFFUSION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nelsonium/fields.hpp"
#include "nelsonium/grid.hpp"

namespace nelsonium {

enum class DriftProvenance { nelson_N, conditioned_Nn, limit_hartree, oracle };

std::string drift_provenance_name(DriftProvenance p);

// Time-indexed drift b(x, t) on a fixed grid. Between snapshots the sampler
// holds the most recent slice (explicit Euler convention). Snapshot spacing
// must be an integer multiple of the sampler step.
struct DriftTrajectory {
    std::vector<double> times;
    std::vector<VectorField> drifts;
    DriftProvenance provenance = DriftProvenance::oracle;
};

// Sampled paths. Positions are stored frame-major (frame, path, axis) at
// every snapshot_stride-th step. The drift action sum_k |b|^2 dt and the net
// winding are accumulated at full step resolution during integration, so a
// strided ensemble still carries exact path functionals.
struct PathEnsemble {
    double box_length = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    DriftProvenance drift_provenance = DriftProvenance::oracle;
    std::uint32_t n_paths = 0;
    std::uint32_t dims = 0;
    std::vector<double> frame_times;
    std::vector<double> positions;     // frame_times.size() * n_paths * dims
    std::vector<double> drift_action;  // per path
    std::vector<double> winding;       // per path * dims, in box lengths
    std::uint64_t clamp_events = 0;

    double position(std::size_t frame, std::size_t path, std::uint32_t axis) const {
        return positions[(frame * n_paths + path) * dims + axis];
    }
};

// Initial draws: inverse-CDF per axis when the density factorizes over axes
// (detected numerically), otherwise rejection sampling against the uniform
// envelope. Path k draws from the dedicated initial-draw stream of (seed, k).
// Aborts when the rejection acceptance rate falls below 1e-4.
std::vector<double> sample_initial(const RealField& rho0, std::uint32_t K, std::uint64_t seed);

struct EulerOptions {
    std::uint64_t seed = 0;
    std::uint32_t snapshot_stride = 1;
    std::uint32_t n_threads = 1;
    bool disable_noise = false;  // test hook: deterministic characteristics
};

// Euler-Maruyama with unit diffusion: X_{k+1} = X_k + b dt + sqrt(dt) xi.
// Drift is clamped at |b| <= 10/sqrt(dt) with events counted; positions wrap
// periodically with net winding recorded. Per-path counter streams make the
// result independent of thread count. A single-step displacement beyond two
// box lengths throws numerical_breach.
PathEnsemble euler_maruyama(const DriftTrajectory& drift, const std::vector<double>& x0,
                            double dt, const EulerOptions& opts);

inline constexpr double kDriftClampScale = 10.0;  // b_max = 10 / sqrt(dt)

struct EmpiricalMarginal {
    RealField histogram;                // normalized density on the subset grid
    std::vector<double> sorted_samples; // filled for single-axis subsets only
};

// Histogram of the selected coordinates at a frame time, node-centered cells.
EmpiricalMarginal empirical_marginal(const PathEnsemble& ensemble, double t,
                                     const std::vector<std::uint32_t>& subset, const Grid& grid);

} // namespace nelsonium

#endif
