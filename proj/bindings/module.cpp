// Python bindings for the experiment driver and a few closed-form helpers.
// The heavy lifting stays in C++; Python gets the runner plus enough oracle
// surface to script parameter scans and read the JSON artifacts back.

#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nelsonium/errors.hpp"
#include "nelsonium/experiment.hpp"
#include "nelsonium/metrics.hpp"
#include "nelsonium/oracle.hpp"

namespace py = pybind11;
using namespace nelsonium;

#ifndef NELSONIUM_VERSION
#define NELSONIUM_VERSION "0.0.0"
#endif

PYBIND11_MODULE(_core, m) {
    m.doc() = "Nelson diffusion laboratory: experiment runner and closed-form helpers";
    m.attr("__version__") = NELSONIUM_VERSION;

    py::register_exception<config_error>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<numerical_breach>(m, "NumericalBreach", PyExc_RuntimeError);

    m.def(
        "run_experiment",
        [](const std::string& experiment, const std::string& config,
           std::optional<std::uint64_t> seed, std::optional<std::string> out) {
            CliOptions opts;
            opts.experiment = experiment;
            opts.config_path = config;
            opts.seed_override = seed;
            opts.out_override = std::move(out);
            return run_experiment(opts);
        },
        py::arg("experiment"), py::arg("config"), py::arg("seed") = std::nullopt,
        py::arg("out") = std::nullopt,
        "Run one experiment end to end; returns 0 when every embedded check passed, 1 "
        "otherwise. Raises ConfigError or NumericalBreach like the CLI's exit codes 2 and 3.");

    m.def("w1_distance", &w1_distance, py::arg("a"), py::arg("b"),
          "Wasserstein-1 distance between two equal-size 1D samples");

    m.def("gaussian_w1", &gaussian_w1, py::arg("mean_a"), py::arg("var_a"), py::arg("mean_b"),
          py::arg("var_b"), "Exact W1 distance between two 1D Gaussians");

    m.def(
        "hartree_limit_moments",
        [](double trap_omega, double coupling_g, double mean0, double variance0, double t) {
            QuadraticModel model;
            model.N = 1;
            model.trap_omega = trap_omega;
            model.coupling_g = coupling_g;
            model.mean0 = mean0;
            model.variance0 = variance0;
            const GaussianMarginal marg = hartree_limit(model, t);
            py::dict out;
            out["t"] = marg.t;
            out["mean"] = marg.mean;
            out["variance"] = marg.sigma.entry(0, 0);
            out["momentum"] = marg.momentum;
            return out;
        },
        py::arg("trap_omega"), py::arg("coupling_g"), py::arg("mean0"), py::arg("variance0"),
        py::arg("t"),
        "Mean, variance and momentum of the closed-form one-body mean-field limit at time t");
}
