#include "nelsonium/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "nelsonium/errors.hpp"
#include "nelsonium/quadrature.hpp"
#include "nelsonium/rng.hpp"

namespace nelsonium {

std::string drift_provenance_name(DriftProvenance p) {
    switch (p) {
        case DriftProvenance::nelson_N: return "nelson_N";
        case DriftProvenance::conditioned_Nn: return "conditioned_Nn";
        case DriftProvenance::limit_hartree: return "limit_hartree";
        case DriftProvenance::oracle: return "oracle";
    }
    return "unknown";
}

namespace {

// Cell-edge CDF inversion for one axis: cell i spans node_i +- dx/2 with
// constant density rho_i, so the inverse is piecewise linear.
struct AxisSampler {
    double left_edge = 0.0;
    double dx = 0.0;
    std::vector<double> cdf;      // cumulative mass at right cell edges
    std::vector<double> density;  // per cell, after normalization

    explicit AxisSampler(const RealField& marginal) {
        const Grid& g = marginal.grid();
        dx = g.spacing;
        left_edge = -0.5 * g.box_length - 0.5 * dx;
        const std::size_t M = marginal.size();
        cdf.resize(M);
        density.resize(M);
        double total = 0.0;
        for (std::size_t i = 0; i < M; ++i) {
            total += std::max(marginal[i], 0.0) * dx;
            cdf[i] = total;
        }
        if (total <= 0.0) throw config_error("sample_initial: density has no mass");
        for (std::size_t i = 0; i < M; ++i) {
            cdf[i] /= total;
            density[i] = std::max(marginal[i], 0.0) / total;
        }
        cdf.back() = 1.0;
    }

    double draw(double u) const {
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const std::size_t i = std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1);
        const double below = i == 0 ? 0.0 : cdf[i - 1];
        const double within = density[i] > 0.0 ? (u - below) / density[i] : 0.0;
        return left_edge + static_cast<double>(i) * dx + within;
    }
};

bool factorizes_over_axes(const RealField& rho, const std::vector<RealField>& marginals) {
    const Grid& g = rho.grid();
    const double tol = 1e-10 * rho.max();
    std::vector<std::uint32_t> idx(g.total_dims);
    for (std::size_t flat = 0; flat < rho.size(); ++flat) {
        g.unflatten(flat, idx.data());
        double prod = 1.0;
        for (std::uint32_t a = 0; a < g.total_dims; ++a) prod *= marginals[a][idx[a]];
        if (std::abs(prod - rho[flat]) > tol) return false;
    }
    return true;
}

} // namespace

std::vector<double> sample_initial(const RealField& rho0, std::uint32_t K, std::uint64_t seed) {
    if (K == 0) throw config_error("sample_initial: need at least one path");
    const Grid& g = rho0.grid();
    const std::uint32_t D = g.total_dims;
    std::vector<double> out(static_cast<std::size_t>(K) * D);

    std::vector<RealField> marginals;
    for (std::uint32_t a = 0; a < D; ++a) {
        std::vector<std::uint32_t> removed;
        for (std::uint32_t b = 0; b < D; ++b)
            if (b != a) removed.push_back(b);
        marginals.push_back(integrate_axes(rho0, removed));
    }

    if (D == 1 || factorizes_over_axes(rho0, marginals)) {
        std::vector<AxisSampler> samplers;
        for (std::uint32_t a = 0; a < D; ++a) samplers.emplace_back(marginals[a]);
        for (std::uint32_t k = 0; k < K; ++k) {
            RngStream stream(seed, static_cast<std::uint64_t>(k) | kInitialDrawBit);
            for (std::uint32_t a = 0; a < D; ++a)
                out[static_cast<std::size_t>(k) * D + a] = samplers[a].draw(stream.uniform());
        }
        return out;
    }

    // Rejection against the uniform envelope at the density maximum.
    const double height = rho0.max();
    if (height <= 0.0) throw config_error("sample_initial: density has no mass");
    std::uint64_t proposals = 0;
    std::uint64_t accepts = 0;
    std::vector<double> point(D);
    for (std::uint32_t k = 0; k < K; ++k) {
        RngStream stream(seed, static_cast<std::uint64_t>(k) | kInitialDrawBit);
        for (;;) {
            ++proposals;
            if (proposals % 1000000 == 0 &&
                static_cast<double>(accepts) < 1e-4 * static_cast<double>(proposals))
                throw config_error(
                    "sample_initial: rejection acceptance rate below 1e-4; the density is too "
                    "peaked for a uniform envelope. Shrink the box, refine the grid, or use a "
                    "product density (sampled by per-axis CDF inversion instead).");
            for (std::uint32_t a = 0; a < D; ++a)
                point[a] = -0.5 * g.box_length + stream.uniform() * g.box_length;
            const double y = stream.uniform() * height;
            if (y <= interpolate(rho0, point.data())) {
                ++accepts;
                std::copy(point.begin(), point.end(), out.begin() + static_cast<std::size_t>(k) * D);
                break;
            }
        }
    }
    return out;
}

PathEnsemble euler_maruyama(const DriftTrajectory& drift, const std::vector<double>& x0,
                            double dt, const EulerOptions& opts) {
    if (drift.times.size() < 2 || drift.drifts.size() != drift.times.size())
        throw std::invalid_argument("euler_maruyama: drift needs >= 2 aligned time slices");
    const Grid& g = drift.drifts[0].grid();
    const std::uint32_t D = g.total_dims;
    const double L = g.box_length;
    if (x0.empty() || x0.size() % D != 0)
        throw std::invalid_argument("euler_maruyama: x0 size must be a multiple of the dimension");
    if (!(dt > 0.0)) throw std::invalid_argument("euler_maruyama: dt must be positive");
    for (const VectorField& f : drift.drifts)
        if (!(f.grid() == g)) throw std::invalid_argument("euler_maruyama: drift grids differ");

    const double spacing = drift.times[1] - drift.times[0];
    for (std::size_t j = 1; j < drift.times.size(); ++j)
        if (std::abs(drift.times[j] - drift.times[j - 1] - spacing) > 1e-9 * spacing)
            throw std::invalid_argument("euler_maruyama: drift time slices must be uniform");
    const auto per_slice = static_cast<std::size_t>(std::llround(spacing / dt));
    if (per_slice < 1 || std::abs(spacing - static_cast<double>(per_slice) * dt) > 1e-9 * dt)
        throw std::invalid_argument("euler_maruyama: dt must divide the drift time spacing");

    const auto K = static_cast<std::uint32_t>(x0.size() / D);
    const double t0 = drift.times.front();
    const std::size_t n_steps = per_slice * (drift.times.size() - 1);
    const std::uint32_t stride = std::max<std::uint32_t>(opts.snapshot_stride, 1);

    std::vector<std::size_t> frame_steps;
    for (std::size_t s = 0; s <= n_steps; s += stride) frame_steps.push_back(s);
    if (frame_steps.back() != n_steps) frame_steps.push_back(n_steps);
    std::vector<std::size_t> frame_of_step(n_steps + 1, std::size_t(-1));
    for (std::size_t f = 0; f < frame_steps.size(); ++f) frame_of_step[frame_steps[f]] = f;

    PathEnsemble ens;
    ens.box_length = L;
    ens.dt = dt;
    ens.seed = opts.seed;
    ens.drift_provenance = drift.provenance;
    ens.n_paths = K;
    ens.dims = D;
    for (std::size_t s : frame_steps) ens.frame_times.push_back(t0 + static_cast<double>(s) * dt);
    ens.positions.resize(frame_steps.size() * static_cast<std::size_t>(K) * D);
    ens.drift_action.assign(K, 0.0);
    ens.winding.assign(static_cast<std::size_t>(K) * D, 0.0);

    const double b_max = kDriftClampScale / std::sqrt(dt);
    const double sqrt_dt = std::sqrt(dt);
    std::vector<std::uint64_t> clamp_per_path(K, 0);

    auto run_range = [&](std::uint32_t lo, std::uint32_t hi) {
        std::vector<double> x(D), b(D);
        for (std::uint32_t p = lo; p < hi; ++p) {
            RngStream stream(opts.seed, p);
            std::copy(x0.begin() + static_cast<std::size_t>(p) * D,
                      x0.begin() + static_cast<std::size_t>(p + 1) * D, x.begin());
            for (std::uint32_t a = 0; a < D; ++a)
                ens.positions[(0 * static_cast<std::size_t>(K) + p) * D + a] = x[a];
            for (std::size_t s = 0; s < n_steps; ++s) {
                const std::size_t slice = std::min(s / per_slice, drift.drifts.size() - 1);
                try {
                    interpolate(drift.drifts[slice], x.data(), b.data());
                } catch (const std::runtime_error&) {
                    throw numerical_breach("euler_maruyama: drift lookup produced a non-finite "
                                           "value at t=" +
                                           std::to_string(t0 + static_cast<double>(s) * dt));
                }
                double norm2 = 0.0;
                for (std::uint32_t a = 0; a < D; ++a) norm2 += b[a] * b[a];
                if (norm2 > b_max * b_max) {
                    const double scale_to = b_max / std::sqrt(norm2);
                    for (std::uint32_t a = 0; a < D; ++a) b[a] *= scale_to;
                    norm2 = b_max * b_max;
                    ++clamp_per_path[p];
                }
                ens.drift_action[p] += norm2 * dt;
                for (std::uint32_t a = 0; a < D; ++a) {
                    const double noise = opts.disable_noise ? 0.0 : sqrt_dt * stream.normal();
                    const double disp = b[a] * dt + noise;
                    if (!(std::abs(disp) <= 2.0 * L))
                        throw numerical_breach(
                            "euler_maruyama: single-step displacement beyond two box lengths "
                            "(drift blow-up near a node?) at t=" +
                            std::to_string(t0 + static_cast<double>(s) * dt));
                    double xa = x[a] + disp;
                    const double w = std::floor((xa + 0.5 * L) / L);
                    xa -= w * L;
                    ens.winding[static_cast<std::size_t>(p) * D + a] += w;
                    x[a] = xa;
                }
                const std::size_t f = frame_of_step[s + 1];
                if (f != std::size_t(-1))
                    for (std::uint32_t a = 0; a < D; ++a)
                        ens.positions[(f * static_cast<std::size_t>(K) + p) * D + a] = x[a];
            }
        }
    };

    const std::uint32_t n_threads = std::max<std::uint32_t>(opts.n_threads, 1);
    if (n_threads == 1) {
        run_range(0, K);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(n_threads);
        const std::uint32_t chunk = (K + n_threads - 1) / n_threads;
        for (std::uint32_t t = 0; t < n_threads; ++t) {
            const std::uint32_t lo = std::min(t * chunk, K);
            const std::uint32_t hi = std::min(lo + chunk, K);
            pool.emplace_back([&, t, lo, hi] {
                try {
                    run_range(lo, hi);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (std::thread& th : pool) th.join();
        for (const std::exception_ptr& e : errors)
            if (e) std::rethrow_exception(e);
    }

    // Fixed-order reduction keeps the total independent of the thread split.
    for (std::uint32_t p = 0; p < K; ++p) ens.clamp_events += clamp_per_path[p];
    return ens;
}

EmpiricalMarginal empirical_marginal(const PathEnsemble& ensemble, double t,
                                     const std::vector<std::uint32_t>& subset, const Grid& grid) {
    if (subset.empty()) throw std::invalid_argument("empirical_marginal: empty subset");
    for (std::uint32_t a : subset)
        if (a >= ensemble.dims)
            throw std::invalid_argument("empirical_marginal: subset index out of range");
    if (grid.total_dims != subset.size())
        throw std::invalid_argument("empirical_marginal: grid dimension must match subset size");
    if (std::abs(grid.box_length - ensemble.box_length) > 1e-12)
        throw std::invalid_argument("empirical_marginal: grid box does not match ensemble box");

    std::size_t frame = ensemble.frame_times.size();
    for (std::size_t f = 0; f < ensemble.frame_times.size(); ++f)
        if (std::abs(ensemble.frame_times[f] - t) <= 1e-9 * std::max(1.0, std::abs(t))) {
            frame = f;
            break;
        }
    if (frame == ensemble.frame_times.size())
        throw std::invalid_argument("empirical_marginal: t is not on the recorded frame lattice");

    const std::uint32_t n = static_cast<std::uint32_t>(subset.size());
    const std::uint32_t M = grid.points_per_axis;
    std::vector<double> counts(grid.size(), 0.0);
    std::vector<std::uint32_t> idx(n);
    for (std::uint32_t p = 0; p < ensemble.n_paths; ++p) {
        for (std::uint32_t a = 0; a < n; ++a) {
            const double x = ensemble.position(frame, p, subset[a]);
            auto cell = static_cast<std::int64_t>(
                std::floor((x + 0.5 * grid.box_length) / grid.spacing + 0.5));
            cell %= M;
            if (cell < 0) cell += M;
            idx[a] = static_cast<std::uint32_t>(cell);
        }
        counts[grid.flatten(idx.data())] += 1.0;
    }

    double cell_volume = 1.0;
    for (std::uint32_t a = 0; a < n; ++a) cell_volume *= grid.spacing;
    const double norm = 1.0 / (static_cast<double>(ensemble.n_paths) * cell_volume);
    for (double& c : counts) c *= norm;

    EmpiricalMarginal out{RealField(grid, std::move(counts)), {}};
    if (n == 1) {
        out.sorted_samples.resize(ensemble.n_paths);
        for (std::uint32_t p = 0; p < ensemble.n_paths; ++p)
            out.sorted_samples[p] = ensemble.position(frame, p, subset[0]);
        std::sort(out.sorted_samples.begin(), out.sorted_samples.end());
    }
    return out;
}

} // namespace nelsonium
