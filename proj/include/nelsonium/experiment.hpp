#ifndef NELSONIUM_EXPERIMENT_HPP
#define NELSONIUM_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nelsonium/config.hpp"
#include "nelsonium/diffusion.hpp"
#include "nelsonium/madelung.hpp"
#include "nelsonium/metrics.hpp"
#include "nelsonium/oracle.hpp"
#include "nelsonium/schrodinger.hpp"

namespace nelsonium {

struct CliOptions {
    std::string experiment;
    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_override;
};

// Runs one experiment end to end: validates the config against the
// experiment's schema, executes the stage pipeline, and writes manifest.json,
// report.json, CSV tables and NBF1/NPE1 artifacts into the output directory.
// Returns 0 when every embedded check passes, 1 otherwise. config_error and
// numerical_breach propagate to the caller for exit-code mapping; any stage
// failure leaves a FAILED marker naming the stage next to the partial output.
int run_experiment(const CliOptions& opts);

// Weak path-law comparison of two ensembles sharing (T, dt, K): per-time W1
// of the first coordinate at {0, T/4, T/2, T} plus stochastic-integral probe
// functionals E[sum phi(X) dX] with Monte Carlo error bars.
struct PathLawReport {
    std::vector<double> times;
    std::vector<double> fdd_w1;
    std::vector<double> functional_gap;  // per probe
    std::vector<double> functional_se;   // combined standard error per probe
};

PathLawReport path_law_consistency(const PathEnsemble& a, const PathEnsemble& b,
                                   const ProbeBattery& battery);

// Config-to-object builders, shared with the acceptance harness.
Grid grid_from_config(const Config& cfg);
SchrodingerProblem problem_from_config(const Config& cfg);
ComplexField initial_state_from_config(const Config& cfg, const Grid& grid);
QuadraticModel model_from_config(const Config& cfg);

// Oracle marginal rendered as grid Madelung fields (honest node mask, u and
// v zeroed on it): the bridge from closed forms to field-based diagnostics.
MadelungFields oracle_fields_on_grid(const GaussianMarginal& m, const Grid& grid);

} // namespace nelsonium

#endif
