// Experiment harness: config builders, schema enforcement, artifact layout,
// thread-count invariance of reports, and the path-law comparator.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "nelsonium/diffusion.hpp"
#include "nelsonium/errors.hpp"
#include "nelsonium/experiment.hpp"
#include "nelsonium/metrics.hpp"
#include "nelsonium/quadrature.hpp"

using namespace nelsonium;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path tmp_root() {
    const fs::path root = fs::temp_directory_path() / "nelsonium-harness-tests";
    fs::create_directories(root);
    return root;
}

fs::path write_tmp(const std::string& name, const std::string& text) {
    const fs::path p = tmp_root() / name;
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

std::string evolve_config(const std::string& extra) {
    return std::string("[run]\n"
                       "experiment = evolve\n"
                       "[grid]\n"
                       "box_length = 10\n"
                       "points = 32\n"
                       "[potential]\n"
                       "kind = gaussian_bump\n"
                       "strength = 0.2\n"
                       "[solver]\n"
                       "mode = hartree\n"
                       "dt = 1e-3\n"
                       "T = 0.05\n"
                       "samples = 3\n"
                       "[initial]\n"
                       "kind = gaussian\n"
                       "variance = 0.5\n") +
           extra;
}

DriftTrajectory linear_drift(const Grid& grid, double slope, double shift, double T) {
    std::vector<double> comp(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) comp[i] = slope * grid.node(i) + shift;
    const VectorField b(grid, {comp});
    return DriftTrajectory{{0.0, T}, {b, b}, DriftProvenance::oracle};
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("builders reject inconsistent configs") {
    const std::string base = "[grid]\nbox_length = 10\npoints = 32\nparticles = 2\n"
                             "[potential]\nkind = gaussian_bump\nstrength = 0.1\n"
                             "[solver]\ndt = 1e-3\nT = 0.1\n";
    CHECK_THROWS_AS(problem_from_config(Config::parse_string(base + "mode = hartree\n")),
                    config_error);
    CHECK_THROWS_AS(problem_from_config(Config::parse_string(base + "mode = warp\n")),
                    config_error);

    const Config grid_bad = Config::parse_string("[grid]\nbox_length = 10\npoints = 12\n");
    CHECK_THROWS_AS(grid_from_config(grid_bad), config_error);

    const Grid grid = build_grid(10.0, 32, 1);
    CHECK_THROWS_AS(
        initial_state_from_config(Config::parse_string("[initial]\nkind = vortex\n"), grid),
        config_error);
    CHECK_THROWS_AS(
        initial_state_from_config(
            Config::parse_string("[initial]\nkind = plane_wave\nmomentum_mode = 0.5\n"), grid),
        config_error);

    const ComplexField psi = initial_state_from_config(
        Config::parse_string("[initial]\nkind = gaussian\nmean = 0.5\nvariance = 0.4\n"), grid);
    CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-12));

    const QuadraticModel m = model_from_config(Config::parse_string("[model]\ncoupling_g = 0.3\n"));
    CHECK(m.N == 1);
    CHECK(m.trap_omega == 1.0);
    CHECK(m.coupling_g == 0.3);
    CHECK(m.variance0 == 0.5);
}

TEST_CASE("evolve experiment writes its artifacts and passes") {
    const fs::path cfg = write_tmp("evolve_ok.cfg", evolve_config(""));
    const fs::path out = tmp_root() / "evolve_ok_out";
    fs::remove_all(out);
    CliOptions opts;
    opts.experiment = "evolve";
    opts.config_path = cfg.string();
    opts.out_override = out.string();
    CHECK(run_experiment(opts) == 0);
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(fs::exists(out / "report.json"));
    CHECK(fs::exists(out / "conservation.csv"));
    CHECK(fs::exists(out / "state_final.nbf"));
    CHECK_FALSE(fs::exists(out / "FAILED"));

    const json report = read_json(out / "report.json");
    CHECK(report.at("pass").get<bool>());
    CHECK(report.at("checks").at("norm_conserved").get<bool>());
    CHECK(report.at("checks").at("energy_conserved").get<bool>());

    const json manifest = read_json(out / "manifest.json");
    CHECK(manifest.at("tool") == "nelsonium");
    CHECK(manifest.at("experiment") == "evolve");
    CHECK(manifest.at("threads").get<int>() == 1);
    CHECK(manifest.at("config_hash_fnv1a").get<std::string>().size() == 16);
}

TEST_CASE("unknown keys and mismatched experiment names are config errors") {
    const fs::path bad_key =
        write_tmp("evolve_badkey.cfg", evolve_config("[tolerances]\nnorm_dritf = 1e-8\n"));
    CliOptions opts;
    opts.experiment = "evolve";
    opts.config_path = bad_key.string();
    CHECK_THROWS_AS(run_experiment(opts), config_error);

    const fs::path mismatch = write_tmp("evolve_mismatch.cfg", evolve_config(""));
    CliOptions wrong;
    wrong.experiment = "fields";
    wrong.config_path = mismatch.string();
    CHECK_THROWS_AS(run_experiment(wrong), config_error);

    CliOptions unknown;
    unknown.experiment = "teleport";
    unknown.config_path = mismatch.string();
    CHECK_THROWS_AS(run_experiment(unknown), config_error);
}

TEST_CASE("fields experiment reports finite residuals") {
    const fs::path cfg = write_tmp("fields_ok.cfg",
                                   "[run]\nexperiment = fields\n"
                                   "[grid]\nbox_length = 12\npoints = 64\n"
                                   "[potential]\nkind = gaussian_bump\nstrength = 0.2\n"
                                   "[solver]\nmode = hartree\ndt = 2e-3\nT = 0.1\nsamples = 11\n"
                                   "[initial]\nkind = gaussian\nvariance = 0.5\n");
    const fs::path out = tmp_root() / "fields_ok_out";
    fs::remove_all(out);
    CliOptions opts;
    opts.experiment = "fields";
    opts.config_path = cfg.string();
    opts.out_override = out.string();
    CHECK(run_experiment(opts) == 0);
    const json report = read_json(out / "report.json");
    CHECK(report.at("pass").get<bool>());
    CHECK(report.at("continuity_strong").get<double>() >= 0.0);
    CHECK(report.at("madelung_residual").get<double>() >= 0.0);
    CHECK(fs::exists(out / "rho_final.nbf"));
}

TEST_CASE("marginals experiment verifies exchangeability") {
    const fs::path cfg = write_tmp("marginals_ok.cfg",
                                   "[run]\nexperiment = marginals\n"
                                   "[grid]\nbox_length = 12\npoints = 64\nparticles = 2\n"
                                   "[potential]\nkind = cosine_bounded\nstrength = 0.3\n"
                                   "[solver]\nmode = linear_nbody\ndt = 2e-3\nT = 0.1\n"
                                   "samples = 3\ntrap_omega = 1\n"
                                   "[initial]\nkind = gaussian\nvariance = 0.5\n"
                                   "[marginals]\nn = 1\n");
    const fs::path out = tmp_root() / "marginals_ok_out";
    fs::remove_all(out);
    CliOptions opts;
    opts.experiment = "marginals";
    opts.config_path = cfg.string();
    opts.out_override = out.string();
    CHECK(run_experiment(opts) == 0);
    const json report = read_json(out / "report.json");
    CHECK(report.at("pass").get<bool>());
    CHECK(report.at("exchange_gap").get<double>() <= 1e-10);
    CHECK(fs::exists(out / "rho_marginal.nbf"));
}

TEST_CASE("hierarchy experiment runs the infinite mode with refinement") {
    const fs::path cfg = write_tmp("hierarchy_ok.cfg",
                                   "[run]\nexperiment = hierarchy\n"
                                   "[grid]\nbox_length = 16\npoints = 64\n"
                                   "[potential]\nkind = gaussian_bump\nstrength = 0.5\n"
                                   "[solver]\ndt = 2e-3\nT = 0.2\nsamples = 5\n"
                                   "[initial]\nkind = gaussian\nvariance = 0.5\n"
                                   "[hierarchy]\nmode = infinite\nn = 1\nrefine = true\n"
                                   "[tolerances]\nrefine_ratio = 1.5\n");
    const fs::path out = tmp_root() / "hierarchy_ok_out";
    fs::remove_all(out);
    CliOptions opts;
    opts.experiment = "hierarchy";
    opts.config_path = cfg.string();
    opts.out_override = out.string();
    CHECK(run_experiment(opts) == 0);
    const json report = read_json(out / "report.json");
    CHECK(report.at("pass").get<bool>());
    CHECK(report.at("coarse").at("N").get<int>() == 0);
    CHECK(report.at("refinement_ratio").get<double>() >= 1.5);
    CHECK(fs::exists(out / "hierarchy_terms.csv"));
}

TEST_CASE("sampling without a seed is refused") {
    const fs::path cfg = write_tmp("sample_noseed.cfg",
                                   "[run]\nexperiment = sample\n"
                                   "[grid]\nbox_length = 20\npoints = 64\n"
                                   "[sample]\nsource = oracle_limit\nT = 0.2\ndrift_samples = 21\n"
                                   "[model]\ntrap_omega = 1\nvariance0 = 0.5\n"
                                   "[paths]\nK = 50\ndt = 1e-2\n");
    CliOptions opts;
    opts.experiment = "sample";
    opts.config_path = cfg.string();
    try {
        run_experiment(opts);
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(std::string(e.what()).find("seed") != std::string::npos);
    }
}

TEST_CASE("thread count never changes the report artifacts") {
    auto config_with_threads = [](int threads) {
        std::ostringstream ss;
        ss << "[run]\nexperiment = sample\nseed = 42\n"
           << "[grid]\nbox_length = 20\npoints = 64\n"
           << "[sample]\nsource = oracle_limit\nT = 0.2\ndrift_samples = 21\n"
           << "[model]\ntrap_omega = 1\nvariance0 = 0.5\n"
           << "[paths]\nK = 200\ndt = 1e-2\nsnapshot_stride = 2\nthreads = " << threads << "\n";
        return ss.str();
    };
    const fs::path cfg1 = write_tmp("sample_t1.cfg", config_with_threads(1));
    const fs::path cfg4 = write_tmp("sample_t4.cfg", config_with_threads(4));
    const fs::path out1 = tmp_root() / "sample_t1_out";
    const fs::path out4 = tmp_root() / "sample_t4_out";
    fs::remove_all(out1);
    fs::remove_all(out4);

    CliOptions o1;
    o1.experiment = "sample";
    o1.config_path = cfg1.string();
    o1.out_override = out1.string();
    CliOptions o4 = o1;
    o4.config_path = cfg4.string();
    o4.out_override = out4.string();
    REQUIRE(run_experiment(o1) == 0);
    REQUIRE(run_experiment(o4) == 0);

    for (const char* name : {"report.json", "marginals.csv", "paths.npe"}) {
        const std::string a = slurp(out1 / name);
        const std::string b = slurp(out4 / name);
        REQUIRE(!a.empty());
        CHECK(a == b);
    }
    // The manifests legitimately differ (thread count, config hash).
    CHECK(read_json(out1 / "manifest.json").at("threads").get<int>() == 1);
    CHECK(read_json(out4 / "manifest.json").at("threads").get<int>() == 4);
}

TEST_CASE("path-law comparator: exact zero on identity, detection on a shift") {
    const Grid grid = build_grid(12.0, 64, 1);
    const RealField raw = RealField::from_function(grid, [](const double* x) {
        return std::exp(-x[0] * x[0]);
    });
    const RealField rho0 = scale(raw, 1.0 / integrate(raw));
    const std::uint32_t K = 2000;
    const std::vector<double> x0 = sample_initial(rho0, K, 2);
    EulerOptions opts;
    opts.seed = 5;
    opts.snapshot_stride = 5;

    const DriftTrajectory ou = linear_drift(grid, -1.0, 0.0, 0.5);
    const PathEnsemble ea = euler_maruyama(ou, x0, 1e-3, opts);
    const PathEnsemble eb = euler_maruyama(ou, x0, 1e-3, opts);
    const ProbeBattery battery(grid);

    const PathLawReport same = path_law_consistency(ea, eb, battery);
    for (double w : same.fdd_w1) CHECK(w == 0.0);
    for (double g : same.functional_gap) CHECK(g == 0.0);

    const DriftTrajectory shifted = linear_drift(grid, -1.0, 0.5, 0.5);
    const PathEnsemble ec = euler_maruyama(shifted, x0, 1e-3, opts);
    const PathLawReport diff = path_law_consistency(ea, ec, battery);
    double best_ratio = 0.0;
    for (std::size_t i = 0; i < diff.functional_gap.size(); ++i) {
        if (diff.functional_se[i] > 0.0) {
            best_ratio = std::max(best_ratio, diff.functional_gap[i] / diff.functional_se[i]);
        }
    }
    CHECK(best_ratio > 5.0);
    CHECK(diff.fdd_w1.back() > 0.05);

    EulerOptions dense = opts;
    dense.snapshot_stride = 1;
    const PathEnsemble ed = euler_maruyama(ou, x0, 1e-3, dense);
    CHECK_THROWS_AS(path_law_consistency(ea, ed, battery), std::invalid_argument);
}

TEST_CASE("converge experiment meets its bands without path sampling") {
    const fs::path cfg = write_tmp("converge_ok.cfg",
                                   "[run]\nexperiment = converge\n"
                                   "[sweep]\nN_list = 2, 4, 8, 16\nt_eval = 0.5\n"
                                   "[model]\ntrap_omega = 1\ncoupling_g = 0.5\nvariance0 = 0.5\n");
    const fs::path out = tmp_root() / "converge_ok_out";
    fs::remove_all(out);
    CliOptions opts;
    opts.experiment = "converge";
    opts.config_path = cfg.string();
    opts.out_override = out.string();
    CHECK(run_experiment(opts) == 0);
    const json report = read_json(out / "report.json");
    CHECK(report.at("pass").get<bool>());
    CHECK(report.at("checks").at("w1_strictly_decreasing").get<bool>());
    CHECK(report.at("checks").at("halving_ratio_in_band").get<bool>());
    CHECK(report.at("checks").at("energy_gaps_nonincreasing").get<bool>());
    CHECK(report.at("checks").at("fitted_slope_in_band").get<bool>());

    const std::string csv = slurp(out / "convergence.csv");
    std::size_t lines = 0;
    for (char c : csv) lines += (c == '\n');
    CHECK(lines == 5);  // header + one row per N
}

TEST_CASE("entropy experiment closes on the stationary oracle") {
    const fs::path cfg = write_tmp("entropy_ok.cfg",
                                   "[run]\nexperiment = entropy\n"
                                   "[grid]\nbox_length = 20\npoints = 128\n"
                                   "[entropy]\nsource = oracle\nT = 0.5\nsamples = 101\n"
                                   "[model]\ntrap_omega = 1\nvariance0 = 0.5\n");
    const fs::path out = tmp_root() / "entropy_ok_out";
    fs::remove_all(out);
    CliOptions opts;
    opts.experiment = "entropy";
    opts.config_path = cfg.string();
    opts.out_override = out.string();
    CHECK(run_experiment(opts) == 0);
    const json report = read_json(out / "report.json");
    CHECK(report.at("pass").get<bool>());
    CHECK(report.at("half_girsanov").at("closure_gap").get<double>() <= 1e-6);
    CHECK(report.at("half_girsanov").at("kl_quadrature").get<double>() ==
          doctest::Approx(0.125).epsilon(1e-6));
    CHECK(report.at("paper_literal").at("closure_gap").get<double>() >= 0.0);
}

TEST_CASE("failing tolerance yields exit 1 and a FAILED marker") {
    const fs::path cfg = write_tmp("evolve_fail.cfg",
                                   evolve_config("[tolerances]\nnorm_drift = 1e-30\n"));
    const fs::path out = tmp_root() / "evolve_fail_out";
    fs::remove_all(out);
    CliOptions opts;
    opts.experiment = "evolve";
    opts.config_path = cfg.string();
    opts.out_override = out.string();
    CHECK(run_experiment(opts) == 1);
    CHECK(fs::exists(out / "FAILED"));
    const std::string marker = slurp(out / "FAILED");
    CHECK(marker.find("checks") != std::string::npos);
    const json report = read_json(out / "report.json");
    CHECK_FALSE(report.at("pass").get<bool>());
}

} // TEST_SUITE
