#ifndef NELSONIUM_METRICS_HPP
#define NELSONIUM_METRICS_HPP

#include <functional>
#include <string>
#include <vector>

#include "nelsonium/fields.hpp"

namespace nelsonium {

// Exact 1D Wasserstein-1 for equal-size sample sets (mean absolute difference
// of order statistics); unequal sizes are first resampled onto a common
// quantile ladder. Inputs need not be sorted.
double w1_distance(std::vector<double> a, std::vector<double> b);

// Deterministic midpoint quantiles q_k = (k+1/2)/Q of a sorted sample set or
// of a normalized 1D density (piecewise-linear CDF inversion).
std::vector<double> sample_quantiles(const std::vector<double>& sorted_samples, std::size_t Q);
std::vector<double> density_quantiles(const RealField& rho, std::size_t Q);

inline constexpr std::size_t kQuantileLadder = 4096;

// W1 against / between gridded 1D densities via the shared quantile ladder.
double w1_samples_vs_density(std::vector<double> samples, const RealField& rho,
                             std::size_t Q = kQuantileLadder);
double w1_density_distance(const RealField& rho_a, const RealField& rho_b,
                           std::size_t Q = kQuantileLadder);

// Kolmogorov-Smirnov statistic of a sample set against a reference CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

// Fixed, versioned probe battery: 8 compactly-supported bumps, 4 low Fourier
// modes, 2 coordinate polynomials, tensorized across axes. The id string is
// stamped into every report that uses the battery.
class ProbeBattery {
  public:
    explicit ProbeBattery(const Grid& grid);

    static std::string id() { return "PB1"; }
    std::size_t size() const { return probes_.size(); }
    const RealField& probe(std::size_t i) const { return probes_[i]; }
    // Probe evaluated off-grid (for path functionals).
    double evaluate(std::size_t i, const double* point) const;
    // Analytic gradient rendered on the grid (weak-form residuals integrate
    // against grad phi; the bump probes are too stiff for spectral accuracy).
    VectorField gradient_probe(std::size_t i) const;

  private:
    Grid grid_;
    std::vector<RealField> probes_;
};

// max over the battery of |integral of phi d(mu_a - mu_b)|.
double bounded_lipschitz_distance(const RealField& rho_a, const RealField& rho_b,
                                  const ProbeBattery& battery);
// Vector version: max over probes and components against current densities.
double bounded_lipschitz_distance(const VectorField& j_a, const VectorField& j_b,
                                  const ProbeBattery& battery);

// Least-squares slope of log(f) against log(N) for convergence-rate fits.
double fitted_log_slope(const std::vector<double>& N, const std::vector<double>& f);

} // namespace nelsonium

#endif
