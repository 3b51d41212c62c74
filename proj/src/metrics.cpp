#include "nelsonium/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nelsonium/quadrature.hpp"

namespace nelsonium {

std::vector<double> sample_quantiles(const std::vector<double>& sorted_samples, std::size_t Q) {
    if (sorted_samples.empty()) throw std::invalid_argument("sample_quantiles: empty sample set");
    const std::size_t n = sorted_samples.size();
    std::vector<double> out(Q);
    for (std::size_t k = 0; k < Q; ++k) {
        const double q = (static_cast<double>(k) + 0.5) / static_cast<double>(Q);
        // Midpoint-convention empirical quantile: order statistic i covers
        // ((i)/n, (i+1)/n]; linear interpolation between adjacent statistics.
        const double pos = q * static_cast<double>(n) - 0.5;
        if (pos <= 0.0) {
            out[k] = sorted_samples.front();
        } else if (pos >= static_cast<double>(n - 1)) {
            out[k] = sorted_samples.back();
        } else {
            const auto lo = static_cast<std::size_t>(pos);
            const double frac = pos - static_cast<double>(lo);
            out[k] = sorted_samples[lo] + frac * (sorted_samples[lo + 1] - sorted_samples[lo]);
        }
    }
    return out;
}

std::vector<double> density_quantiles(const RealField& rho, std::size_t Q) {
    const Grid& g = rho.grid();
    if (g.total_dims != 1)
        throw std::invalid_argument("density_quantiles: expects a 1-axis density");
    const std::size_t M = rho.size();
    // Cell-edge CDF: node i carries mass rho_i*dx spread over its dx cell.
    std::vector<double> cdf(M + 1, 0.0);
    for (std::size_t i = 0; i < M; ++i) cdf[i + 1] = cdf[i] + std::max(0.0, rho[i]) * g.spacing;
    const double total = cdf[M];
    if (!(total > 0.0)) throw std::invalid_argument("density_quantiles: density has no mass");
    for (double& c : cdf) c /= total;

    std::vector<double> out(Q);
    std::size_t cell = 0;
    for (std::size_t k = 0; k < Q; ++k) {
        const double q = (static_cast<double>(k) + 0.5) / static_cast<double>(Q);
        while (cell + 1 < M && cdf[cell + 1] < q) ++cell;
        const double mass = cdf[cell + 1] - cdf[cell];
        const double frac = mass > 0.0 ? (q - cdf[cell]) / mass : 0.5;
        const double left_edge = g.node(cell) - 0.5 * g.spacing;
        out[k] = left_edge + frac * g.spacing;
    }
    return out;
}

namespace {

double mean_abs_difference(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
    return sum / static_cast<double>(a.size());
}

} // namespace

double w1_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("w1_distance: empty sample set");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a.size() == b.size()) return mean_abs_difference(a, b);
    const std::size_t Q = std::max(a.size(), b.size());
    return mean_abs_difference(sample_quantiles(a, Q), sample_quantiles(b, Q));
}

double w1_samples_vs_density(std::vector<double> samples, const RealField& rho, std::size_t Q) {
    if (samples.empty()) throw std::invalid_argument("w1_samples_vs_density: empty sample set");
    std::sort(samples.begin(), samples.end());
    return mean_abs_difference(sample_quantiles(samples, Q), density_quantiles(rho, Q));
}

double w1_density_distance(const RealField& rho_a, const RealField& rho_b, std::size_t Q) {
    return mean_abs_difference(density_quantiles(rho_a, Q), density_quantiles(rho_b, Q));
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample set");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double F = cdf(samples[i]);
        sup = std::max(sup, std::abs(F - static_cast<double>(i) / n));
        sup = std::max(sup, std::abs(F - static_cast<double>(i + 1) / n));
    }
    return sup;
}

namespace {

// 1D basis functions of battery PB1, tensorized across axes by probe index.
// Bumps: mollifier exp(1 - 1/(1 - r^2)) at centers (k - 3.5)L/10, width L/8.
// Fourier: cos/sin at the two lowest nonzero modes. Polynomials: x, x^2.
double pb1_axis_function(std::size_t i, double x, double L) {
    if (i < 8) {
        const double c = (static_cast<double>(i) - 3.5) * L / 10.0;
        const double r = (x - c) / (L / 8.0);
        const double r2 = r * r;
        if (r2 >= 1.0) return 0.0;
        return std::exp(1.0 - 1.0 / (1.0 - r2));
    }
    const double k1 = 2.0 * std::numbers::pi / L;
    switch (i) {
        case 8: return std::cos(k1 * x);
        case 9: return std::sin(k1 * x);
        case 10: return std::cos(2.0 * k1 * x);
        case 11: return std::sin(2.0 * k1 * x);
        case 12: return x;
        default: return x * x;
    }
}

double pb1_axis_derivative(std::size_t i, double x, double L) {
    if (i < 8) {
        const double w = L / 8.0;
        const double c = (static_cast<double>(i) - 3.5) * L / 10.0;
        const double r = (x - c) / w;
        const double r2 = r * r;
        if (r2 >= 1.0) return 0.0;
        const double one_m = 1.0 - r2;
        return std::exp(1.0 - 1.0 / one_m) * (-2.0 * r / (one_m * one_m)) / w;
    }
    const double k1 = 2.0 * std::numbers::pi / L;
    switch (i) {
        case 8: return -k1 * std::sin(k1 * x);
        case 9: return k1 * std::cos(k1 * x);
        case 10: return -2.0 * k1 * std::sin(2.0 * k1 * x);
        case 11: return 2.0 * k1 * std::cos(2.0 * k1 * x);
        case 12: return 1.0;
        default: return 2.0 * x;
    }
}

constexpr std::size_t kBatterySize = 14;

} // namespace

ProbeBattery::ProbeBattery(const Grid& grid) : grid_(grid) {
    probes_.reserve(kBatterySize);
    for (std::size_t i = 0; i < kBatterySize; ++i) {
        probes_.push_back(RealField::from_function(grid, [i, &grid](const double* x) {
            double p = 1.0;
            for (std::uint32_t a = 0; a < grid.total_dims; ++a)
                p *= pb1_axis_function(i, x[a], grid.box_length);
            return p;
        }));
    }
}

double ProbeBattery::evaluate(std::size_t i, const double* point) const {
    double p = 1.0;
    for (std::uint32_t a = 0; a < grid_.total_dims; ++a)
        p *= pb1_axis_function(i, point[a], grid_.box_length);
    return p;
}

VectorField ProbeBattery::gradient_probe(std::size_t i) const {
    const std::uint32_t D = grid_.total_dims;
    std::vector<std::vector<double>> comp(D, std::vector<double>(grid_.size(), 0.0));
    std::vector<double> x(D);
    for (std::size_t flat = 0; flat < grid_.size(); ++flat) {
        grid_.coords(flat, x.data());
        for (std::uint32_t a = 0; a < D; ++a) {
            double p = pb1_axis_derivative(i, x[a], grid_.box_length);
            for (std::uint32_t b = 0; b < D; ++b)
                if (b != a) p *= pb1_axis_function(i, x[b], grid_.box_length);
            comp[a][flat] = p;
        }
    }
    return VectorField(grid_, std::move(comp));
}

double bounded_lipschitz_distance(const RealField& rho_a, const RealField& rho_b,
                                  const ProbeBattery& battery) {
    if (!(rho_a.grid() == rho_b.grid()))
        throw std::invalid_argument("bounded_lipschitz_distance: grid mismatch");
    const RealField diff = subtract(rho_a, rho_b);
    double worst = 0.0;
    for (std::size_t i = 0; i < battery.size(); ++i)
        worst = std::max(worst, std::abs(integrate(multiply(battery.probe(i), diff))));
    return worst;
}

double bounded_lipschitz_distance(const VectorField& j_a, const VectorField& j_b,
                                  const ProbeBattery& battery) {
    if (!(j_a.grid() == j_b.grid()) || j_a.components() != j_b.components())
        throw std::invalid_argument("bounded_lipschitz_distance: field mismatch");
    double worst = 0.0;
    for (std::uint32_t c = 0; c < j_a.components(); ++c) {
        const RealField diff = subtract(j_a.component_field(c), j_b.component_field(c));
        for (std::size_t i = 0; i < battery.size(); ++i)
            worst = std::max(worst, std::abs(integrate(multiply(battery.probe(i), diff))));
    }
    return worst;
}

double fitted_log_slope(const std::vector<double>& N, const std::vector<double>& f) {
    if (N.size() != f.size() || N.size() < 2)
        throw std::invalid_argument("fitted_log_slope: need >= 2 matched points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(N.size());
    for (std::size_t i = 0; i < N.size(); ++i) {
        if (!(N[i] > 0.0) || !(f[i] > 0.0))
            throw std::invalid_argument("fitted_log_slope: values must be positive");
        const double x = std::log(N[i]);
        const double y = std::log(f[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace nelsonium
