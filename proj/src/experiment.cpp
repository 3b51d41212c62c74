// Experiment pipelines behind the CLI. Each experiment validates its config
// against a strict schema, runs its stage pipeline, and writes manifest.json,
// report.json, CSV tables and NBF1/NPE1 artifacts into the output directory.
// Reports never carry execution-resource information (thread counts live in
// the manifest only), so identical configs and seeds produce byte-identical
// reports regardless of parallelism.

#include "nelsonium/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "nelsonium/errors.hpp"
#include "nelsonium/hierarchy.hpp"
#include "nelsonium/nbf.hpp"
#include "nelsonium/quadrature.hpp"
#include "nelsonium/thermo.hpp"

#ifndef NELSONIUM_VERSION
#define NELSONIUM_VERSION "0.0.0"
#endif
#ifndef NELSONIUM_GIT_DESCRIBE
#define NELSONIUM_GIT_DESCRIBE "unknown"
#endif

namespace nelsonium {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << text;
    if (!out) {
        throw std::runtime_error("short write to " + path.string());
    }
}

void write_json_file(const fs::path& path, const ordered_json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

struct CheckSet {
    std::vector<std::pair<std::string, bool>> items;

    void add(const std::string& name, bool ok) { items.emplace_back(name, ok); }

    bool all_pass() const {
        for (const auto& [name, ok] : items) {
            if (!ok) return false;
        }
        return true;
    }

    ordered_json to_json() const {
        ordered_json j = ordered_json::object();
        for (const auto& [name, ok] : items) {
            j[name] = ok;
        }
        return j;
    }

    std::string failed_names() const {
        std::string s;
        for (const auto& [name, ok] : items) {
            if (!ok) {
                if (!s.empty()) s += ", ";
                s += name;
            }
        }
        return s;
    }
};

struct Schema {
    std::set<std::string> allowed;
    std::set<std::string> required;
};

const std::set<std::string> kRunKeys = {"run.experiment", "run.seed", "run.output_dir"};
const std::set<std::string> kSolveKeys = {
    "grid.box_length", "grid.points",      "grid.particles",        "potential.kind",
    "potential.strength", "potential.width", "solver.mode",         "solver.dt",
    "solver.T",        "solver.samples",   "solver.trap_omega",     "initial.kind",
    "initial.mean",    "initial.variance", "initial.phase_curvature", "initial.momentum",
    "initial.momentum_mode"};
const std::set<std::string> kModelKeys = {"model.N",     "model.trap_omega",
                                          "model.coupling_g", "model.mean0",
                                          "model.variance0",  "model.phase_curvature0"};
const std::set<std::string> kPathKeys = {"paths.K", "paths.dt", "paths.snapshot_stride",
                                         "paths.threads"};

std::set<std::string> merge(std::initializer_list<std::set<std::string>> sets) {
    std::set<std::string> out;
    for (const auto& s : sets) out.insert(s.begin(), s.end());
    return out;
}

const std::map<std::string, Schema>& schemas() {
    static const std::map<std::string, Schema> table = [] {
        std::map<std::string, Schema> t;
        t["evolve"] = Schema{
            merge({kRunKeys, kSolveKeys,
                   {"tolerances.norm_drift", "tolerances.energy_drift"}}),
            {"grid.box_length", "grid.points", "potential.kind", "potential.strength",
             "solver.mode", "solver.dt", "solver.T"}};
        t["fields"] = Schema{
            merge({kRunKeys, kSolveKeys,
                   {"fields.doubled_diagnostic", "tolerances.continuity_weak",
                    "tolerances.continuity_strong", "tolerances.madelung"}}),
            {"grid.box_length", "grid.points", "potential.kind", "potential.strength",
             "solver.mode", "solver.dt", "solver.T"}};
        t["marginals"] = Schema{
            merge({kRunKeys, kSolveKeys,
                   {"marginals.n", "tolerances.exchangeability"}}),
            {"grid.box_length", "grid.points", "grid.particles", "potential.kind",
             "potential.strength", "solver.mode", "solver.dt", "solver.T"}};
        t["sample"] = Schema{
            merge({kRunKeys, kSolveKeys, kModelKeys, kPathKeys,
                   {"sample.source", "sample.T", "sample.drift_samples", "tolerances.w1"}}),
            {"grid.box_length", "grid.points", "sample.source", "paths.K", "paths.dt"}};
        t["entropy"] = Schema{
            merge({kRunKeys, kSolveKeys, kModelKeys, kPathKeys,
                   {"entropy.source", "entropy.T", "entropy.samples", "tolerances.closure"}}),
            {"grid.box_length", "grid.points", "entropy.source"}};
        t["hierarchy"] = Schema{
            merge({kRunKeys, kSolveKeys,
                   {"hierarchy.n", "hierarchy.mode", "hierarchy.refine",
                    "tolerances.refine_ratio"}}),
            {"grid.box_length", "grid.points", "potential.kind", "potential.strength",
             "solver.dt", "solver.T"}};
        // model.N is excluded on purpose: the sweep supplies N.
        std::set<std::string> converge_model = kModelKeys;
        converge_model.erase("model.N");
        t["converge"] = Schema{
            merge({kRunKeys, converge_model, kPathKeys,
                   {"sweep.N_list", "sweep.t_eval", "sweep.path_N_list", "sweep.path_T",
                    "sweep.drift_samples", "grid.box_length", "grid.points"}}),
            {"sweep.N_list"}};
        return t;
    }();
    return table;
}

std::uint64_t require_seed(const std::optional<std::uint64_t>& seed, const std::string& exp) {
    if (!seed) {
        throw config_error(exp + " draws random numbers and needs a seed (run.seed or --seed)");
    }
    return *seed;
}

std::vector<double> uniform_times(double T, std::size_t count) {
    std::vector<double> ts(count);
    for (std::size_t i = 0; i < count; ++i) {
        ts[i] = T * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    ts.back() = T;
    return ts;
}

// Sample spacing must sit on the integrator's step lattice; reported as a
// config error before the solver gets a chance to reject it.
void require_on_lattice(double spacing, double dt, const std::string& what) {
    if (!(dt > 0.0) || !(spacing > 0.0)) {
        throw config_error(what + ": step and spacing must be positive");
    }
    const double ratio = spacing / dt;
    const double rounded = std::llround(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
        throw config_error(what + ": sample spacing " + fmt17(spacing) +
                           " is not an integer multiple of the step " + fmt17(dt));
    }
}

std::size_t nearest_index(const std::vector<double>& times, double target) {
    std::size_t best = 0;
    double best_gap = std::abs(times[0] - target);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double gap = std::abs(times[i] - target);
        if (gap < best_gap) {
            best = i;
            best_gap = gap;
        }
    }
    return best;
}

std::size_t solver_samples(const Config& cfg, std::size_t fallback) {
    const std::size_t samples = cfg.get_u32("solver.samples", static_cast<std::uint32_t>(fallback));
    if (samples < 2) {
        throw config_error("solver.samples must be at least 2");
    }
    return samples;
}

EvolveResult solve_from_config(const Config& cfg, const SchrodingerProblem& problem,
                               std::size_t samples) {
    require_on_lattice(problem.T / static_cast<double>(samples - 1), problem.dt, "solver");
    const ComplexField psi0 = initial_state_from_config(cfg, problem.grid);
    return evolve(problem, psi0, uniform_times(problem.T, samples));
}

ordered_json grid_json(const Grid& grid) {
    ordered_json j;
    j["box_length"] = grid.box_length;
    j["points"] = grid.points_per_axis;
    j["particles"] = grid.total_dims;
    return j;
}

double sample_mean(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs, double mean) {
    double s = 0.0;
    for (double x : xs) s += (x - mean) * (x - mean);
    return s / static_cast<double>(xs.size());
}

// sup |rho(x0, x1, rest) - rho(x1, x0, rest)|: the first two particle axes
// must be interchangeable for an exchangeable state.
double exchange_gap(const RealField& rho) {
    const Grid& g = rho.grid();
    if (g.total_dims < 2) return 0.0;
    std::vector<std::uint32_t> idx(g.total_dims);
    double gap = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.unflatten(i, idx.data());
        std::swap(idx[0], idx[1]);
        const std::size_t j = g.flatten(idx.data());
        gap = std::max(gap, std::abs(rho[i] - rho[j]));
    }
    return gap;
}

void write_vector_components(const fs::path& out_dir, const std::string& stem,
                             const VectorField& w) {
    for (std::uint32_t c = 0; c < w.components(); ++c) {
        write_nbf((out_dir / (stem + "_" + std::to_string(c) + ".nbf")).string(),
                  w.component_field(c));
    }
}

// ---------------------------------------------------------------------------
// evolve: march the configured problem and gate on conservation drifts.

void run_evolve(const Config& cfg, const std::optional<std::uint64_t>&, const fs::path& out_dir,
                CheckSet& checks, ordered_json& report, std::string& stage) {
    stage = "solve";
    const SchrodingerProblem problem = problem_from_config(cfg);
    const std::size_t samples = solver_samples(cfg, 11);
    const EvolveResult res = solve_from_config(cfg, problem, samples);

    stage = "diagnostics";
    double norm_drift = 0.0;
    double energy_drift = 0.0;
    const double e0 = res.conservation.front().energy;
    const double e_scale = std::max(std::abs(e0), 1e-300);
    std::string csv = "t,norm,energy\n";
    for (const ConservationSample& s : res.conservation) {
        norm_drift = std::max(norm_drift, std::abs(s.norm - 1.0));
        energy_drift = std::max(energy_drift, std::abs(s.energy - e0) / e_scale);
        csv += fmt17(s.t) + "," + fmt17(s.norm) + "," + fmt17(s.energy) + "\n";
    }

    stage = "artifacts";
    write_text_file(out_dir / "conservation.csv", csv);
    write_nbf((out_dir / "state_final.nbf").string(), res.states.back());

    report["grid"] = grid_json(problem.grid);
    report["solver"]["mode"] =
        problem.mode == SolverMode::hartree ? "hartree" : "linear_nbody";
    report["solver"]["dt"] = problem.dt;
    report["solver"]["T"] = problem.T;
    report["solver"]["trap_omega"] = problem.trap_omega;
    report["energy_convention"] =
        problem.mode == SolverMode::hartree
            ? "kinetic + trap + half pair self-energy (conserved functional)"
            : "kinetic + potential expectation";
    report["samples"] = samples;
    report["max_norm_drift"] = norm_drift;
    report["max_energy_drift_rel"] = energy_drift;

    const double tol_norm = cfg.get_double("tolerances.norm_drift", 1e-8);
    const double tol_energy = cfg.get_double("tolerances.energy_drift", 1e-6);
    checks.add("norm_conserved", norm_drift <= tol_norm);
    checks.add("energy_conserved", energy_drift <= tol_energy);
}

// ---------------------------------------------------------------------------
// fields: Madelung extraction plus continuity and momentum-equation residuals.

void run_fields(const Config& cfg, const std::optional<std::uint64_t>&, const fs::path& out_dir,
                CheckSet& checks, ordered_json& report, std::string& stage) {
    stage = "solve";
    const SchrodingerProblem problem = problem_from_config(cfg);
    const std::size_t samples = solver_samples(cfg, 11);
    const EvolveResult res = solve_from_config(cfg, problem, samples);

    stage = "extract";
    std::vector<MadelungFields> series;
    std::vector<RealField> rho_series;
    std::vector<VectorField> v_series;
    series.reserve(res.states.size());
    double node_mass = 0.0;
    for (const ComplexField& psi : res.states) {
        series.push_back(extract(psi));
        node_mass = std::max(node_mass, series.back().node_mass);
        rho_series.push_back(series.back().rho);
        v_series.push_back(series.back().v);
    }

    stage = "residuals";
    const ContinuityResidual cont = continuity_residual(res.times, rho_series, v_series);
    MadelungResidualReport mad;
    if (problem.mode == SolverMode::hartree) {
        std::optional<VectorField> grad_trap;
        if (problem.trap_omega != 0.0) {
            grad_trap = assemble_trap_gradient(problem.grid, problem.trap_omega);
        }
        mad = madelung_residual(res.times, series, MadelungPotentialMode::hartree,
                                grad_trap ? &*grad_trap : nullptr, &problem.potential);
        if (cfg.get_bool("fields.doubled_diagnostic", false)) {
            const MadelungResidualReport doubled =
                madelung_residual(res.times, series, MadelungPotentialMode::hartree_doubled,
                                  grad_trap ? &*grad_trap : nullptr, &problem.potential);
            report["madelung_residual_doubled"] = doubled.value;
        }
    } else {
        VectorField grad =
            assemble_nbody_potential_gradient(problem.grid, problem.potential, problem.n_particles);
        if (problem.trap_omega != 0.0) {
            grad = add(grad, assemble_trap_gradient(problem.grid, problem.trap_omega));
        }
        mad = madelung_residual(res.times, series, MadelungPotentialMode::external_V, &grad,
                                nullptr);
    }

    stage = "artifacts";
    const MadelungFields& last = series.back();
    write_nbf((out_dir / "rho_final.nbf").string(), last.rho);
    write_vector_components(out_dir, "u_final", last.u);
    write_vector_components(out_dir, "v_final", last.v);

    report["grid"] = grid_json(problem.grid);
    report["samples"] = samples;
    report["node_mass_max"] = node_mass;
    report["continuity_weak"] = cont.weak;
    report["continuity_strong"] = cont.strong;
    report["continuity_excluded_mass"] = cont.excluded_mass;
    report["probe_battery"] = cont.probe_battery;
    report["madelung_residual"] = mad.value;
    report["madelung_excluded_mass"] = mad.excluded_mass;

    checks.add("residuals_finite", std::isfinite(cont.weak) && std::isfinite(cont.strong) &&
                                       std::isfinite(mad.value));
    if (cfg.has("tolerances.continuity_weak")) {
        checks.add("continuity_weak_within_tolerance",
                   cont.weak <= cfg.get_double("tolerances.continuity_weak"));
    }
    if (cfg.has("tolerances.continuity_strong")) {
        checks.add("continuity_strong_within_tolerance",
                   cont.strong <= cfg.get_double("tolerances.continuity_strong"));
    }
    if (cfg.has("tolerances.madelung")) {
        checks.add("madelung_within_tolerance",
                   mad.value <= cfg.get_double("tolerances.madelung"));
    }
}

// ---------------------------------------------------------------------------
// marginals: N-body solve, marginal Madelung variables, exchangeability and
// the osmotic-norm bound against the full kinetic energy.

void run_marginals(const Config& cfg, const std::optional<std::uint64_t>&,
                   const fs::path& out_dir, CheckSet& checks, ordered_json& report,
                   std::string& stage) {
    stage = "solve";
    const SchrodingerProblem problem = problem_from_config(cfg);
    if (problem.mode != SolverMode::linear_nbody || problem.n_particles < 2) {
        throw config_error("marginals needs solver.mode = linear_nbody and grid.particles >= 2");
    }
    const std::uint32_t n = cfg.get_u32("marginals.n", 1);
    if (n < 1 || n >= problem.n_particles) {
        throw config_error("marginals.n must satisfy 1 <= n < grid.particles");
    }
    const std::size_t samples = solver_samples(cfg, 5);
    const EvolveResult res = solve_from_config(cfg, problem, samples);

    stage = "marginalize";
    const MadelungFields full = extract(res.states.back());
    const double ex_gap = exchange_gap(full.rho);
    const MarginalSet marg = marginalize(full, n);
    const double osmotic_norm = weighted_l2_norm(marg.u, marg.rho);
    const double kinetic = kinetic_energy(res.states.back());
    const double bound = std::sqrt(2.0 * kinetic);

    stage = "artifacts";
    write_nbf((out_dir / "rho_marginal.nbf").string(), marg.rho);
    write_vector_components(out_dir, "u_marginal", marg.u);
    write_vector_components(out_dir, "v_marginal", marg.v);

    report["grid"] = grid_json(problem.grid);
    report["n"] = n;
    report["exchange_gap"] = ex_gap;
    report["full_node_mass"] = full.node_mass;
    report["marginal_node_mass"] = marg.node_mass;
    report["osmotic_norm"] = osmotic_norm;
    report["osmotic_norm_bound"] = bound;
    report["kinetic_energy"] = kinetic;

    const double tol_ex = cfg.get_double("tolerances.exchangeability", 1e-10);
    checks.add("density_exchangeable", ex_gap <= tol_ex);
    checks.add("marginal_osmotic_bound", osmotic_norm <= bound * (1.0 + 1e-9) + 1e-12);
}

// ---------------------------------------------------------------------------
// sample: integrate the Nelson diffusion of a drift trajectory and compare
// marginals against the generating density.

struct DriftSource {
    DriftTrajectory traj;
    RealField rho0;
    // Reference density at an arbitrary requested time (closed-form sources)
    // or at the nearest stored slice (solver source).
    std::function<std::optional<RealField>(double)> reference;
};

DriftSource build_drift_source(const Config& cfg, const std::string& source, const Grid& grid,
                               const std::vector<double>& slice_times) {
    DriftSource out;
    out.traj.times = slice_times;
    if (source == "oracle_conditioned" || source == "oracle_limit") {
        const QuadraticModel model = model_from_config(cfg);
        if (source == "oracle_conditioned") {
            if (model.N < 2) {
                throw config_error("oracle_conditioned needs model.N >= 2");
            }
            const std::vector<GaussianState> states = solve_quadratic(model, slice_times);
            for (const GaussianState& st : states) {
                out.traj.drifts.push_back(render_marginal_drift(exact_marginal(st, 1), grid));
            }
            out.rho0 = render_marginal_density(exact_marginal(states.front(), 1), grid);
            out.traj.provenance = DriftProvenance::conditioned_Nn;
            out.reference = [model, grid](double t) -> std::optional<RealField> {
                const std::vector<GaussianState> st = solve_quadratic(model, {t});
                return render_marginal_density(exact_marginal(st.front(), 1), grid);
            };
        } else {
            for (double t : slice_times) {
                out.traj.drifts.push_back(render_marginal_drift(hartree_limit(model, t), grid));
            }
            out.rho0 = render_marginal_density(hartree_limit(model, 0.0), grid);
            out.traj.provenance = DriftProvenance::limit_hartree;
            out.reference = [model, grid](double t) -> std::optional<RealField> {
                return render_marginal_density(hartree_limit(model, t), grid);
            };
        }
        return out;
    }
    if (source == "hartree") {
        SchrodingerProblem problem = problem_from_config(cfg);
        if (problem.mode != SolverMode::hartree || problem.grid.total_dims != 1) {
            throw config_error("sample source 'hartree' needs solver.mode = hartree on one axis");
        }
        problem.T = slice_times.back();
        const EvolveResult res = solve_from_config(cfg, problem, slice_times.size());
        std::vector<RealField> densities;
        for (const ComplexField& psi : res.states) {
            const MadelungFields f = extract(psi);
            out.traj.drifts.push_back(add(f.u, f.v));
            densities.push_back(f.rho);
        }
        out.rho0 = densities.front();
        out.traj.provenance = DriftProvenance::limit_hartree;
        const std::vector<double> times = res.times;
        out.reference = [times, densities](double t) -> std::optional<RealField> {
            const std::size_t j = nearest_index(times, t);
            if (std::abs(times[j] - t) > 1e-9 * std::max(1.0, std::abs(t))) {
                return std::nullopt;
            }
            return densities[j];
        };
        return out;
    }
    throw config_error("sample.source must be oracle_conditioned, oracle_limit or hartree");
}

void run_sample(const Config& cfg, const std::optional<std::uint64_t>& seed_opt,
                const fs::path& out_dir, CheckSet& checks, ordered_json& report,
                std::string& stage) {
    stage = "setup";
    const std::uint64_t seed = require_seed(seed_opt, "sample");
    const std::string source = cfg.get_string("sample.source");
    const double T = cfg.get_double("sample.T", 1.0);
    const std::size_t slices = cfg.get_u32("sample.drift_samples", 101);
    if (slices < 2) {
        throw config_error("sample.drift_samples must be at least 2");
    }
    const double path_dt = cfg.get_double("paths.dt");
    const std::uint32_t K = cfg.get_u32("paths.K");
    const std::uint32_t stride = cfg.get_u32("paths.snapshot_stride", 1);
    const std::uint32_t threads = cfg.get_u32("paths.threads", 1);
    const Grid grid = build_grid(cfg.get_double("grid.box_length"), cfg.get_u32("grid.points"), 1);
    const std::vector<double> slice_times = uniform_times(T, slices);
    require_on_lattice(T / static_cast<double>(slices - 1), path_dt, "paths");

    stage = "drift";
    const DriftSource drift = build_drift_source(cfg, source, grid, slice_times);

    stage = "integrate";
    const std::vector<double> x0 = sample_initial(drift.rho0, K, seed);
    EulerOptions eopts;
    eopts.seed = seed;
    eopts.snapshot_stride = stride;
    eopts.n_threads = threads;
    const PathEnsemble ens = euler_maruyama(drift.traj, x0, path_dt, eopts);

    stage = "marginals";
    std::string csv = "t,mean,variance,w1_reference\n";
    ordered_json rows = ordered_json::array();
    double w1_worst = 0.0;
    bool all_finite = true;
    std::vector<std::size_t> eval_frames;
    for (double q : {0.0, 0.25, 0.5, 1.0}) {
        const std::size_t f = nearest_index(ens.frame_times, q * T);
        if (eval_frames.empty() || eval_frames.back() != f) {
            eval_frames.push_back(f);
        }
    }
    for (std::size_t f : eval_frames) {
        const double t = ens.frame_times[f];
        const EmpiricalMarginal em = empirical_marginal(ens, t, {0}, grid);
        const double mean = sample_mean(em.sorted_samples);
        const double var = sample_variance(em.sorted_samples, mean);
        const std::optional<RealField> ref = drift.reference(t);
        double w1 = std::numeric_limits<double>::quiet_NaN();
        if (ref) {
            w1 = w1_samples_vs_density(em.sorted_samples, *ref);
            w1_worst = std::max(w1_worst, w1);
            all_finite = all_finite && std::isfinite(w1);
        }
        all_finite = all_finite && std::isfinite(mean) && std::isfinite(var);
        csv += fmt17(t) + "," + fmt17(mean) + "," + fmt17(var) + "," + fmt17(w1) + "\n";
        ordered_json row;
        row["t"] = t;
        row["mean"] = mean;
        row["variance"] = var;
        row["w1_reference"] = w1;
        rows.push_back(row);
    }

    stage = "artifacts";
    PathFrames pf;
    pf.box_length = ens.box_length;
    pf.n_paths = ens.n_paths;
    pf.n_frames = static_cast<std::uint32_t>(ens.frame_times.size());
    pf.dims = ens.dims;
    pf.times = ens.frame_times;
    pf.positions = ens.positions;
    write_npe((out_dir / "paths.npe").string(), pf);
    write_text_file(out_dir / "marginals.csv", csv);

    double winding_max = 0.0;
    for (double w : ens.winding) winding_max = std::max(winding_max, std::abs(w));
    report["source"] = source;
    report["drift_provenance"] = drift_provenance_name(ens.drift_provenance);
    if (source != "hartree") {
        report["hypothesis_flag"] = kOracleHypothesisFlag;
    }
    report["grid"] = grid_json(grid);
    report["T"] = T;
    report["drift_samples"] = slices;
    report["paths"]["K"] = K;
    report["paths"]["dt"] = path_dt;
    report["paths"]["snapshot_stride"] = stride;
    report["clamp_events"] = ens.clamp_events;
    report["winding_max"] = winding_max;
    report["marginal_rows"] = rows;

    checks.add("marginal_statistics_finite", all_finite);
    if (cfg.has("tolerances.w1")) {
        checks.add("w1_within_tolerance", w1_worst <= cfg.get_double("tolerances.w1"));
    }
}

// ---------------------------------------------------------------------------
// entropy: field-based relative entropy under both conventions, with an
// optional pathwise Monte Carlo cross-check.

void run_entropy(const Config& cfg, const std::optional<std::uint64_t>& seed_opt,
                 const fs::path& out_dir, CheckSet& checks, ordered_json& report,
                 std::string& stage) {
    stage = "setup";
    const std::string source = cfg.get_string("entropy.source");
    const double T = cfg.get_double("entropy.T", 1.0);
    const std::size_t samples = cfg.get_u32("entropy.samples", 401);
    if (samples < 3) {
        throw config_error("entropy.samples must be at least 3");
    }
    const Grid grid = build_grid(cfg.get_double("grid.box_length"), cfg.get_u32("grid.points"), 1);
    const std::vector<double> times = uniform_times(T, samples);

    stage = "fields";
    std::vector<MadelungFields> series;
    series.reserve(times.size());
    if (source == "oracle") {
        const QuadraticModel model = model_from_config(cfg);
        for (double t : times) {
            series.push_back(oracle_fields_on_grid(hartree_limit(model, t), grid));
        }
        report["hypothesis_flag"] = kOracleHypothesisFlag;
    } else if (source == "hartree") {
        SchrodingerProblem problem = problem_from_config(cfg);
        if (problem.mode != SolverMode::hartree || problem.grid.total_dims != 1) {
            throw config_error("entropy source 'hartree' needs solver.mode = hartree on one axis");
        }
        problem.T = T;
        const EvolveResult res = solve_from_config(cfg, problem, samples);
        for (const ComplexField& psi : res.states) {
            series.push_back(extract(psi));
        }
    } else {
        throw config_error("entropy.source must be oracle or hartree");
    }

    stage = "entropy";
    EntropyReport half;
    EntropyReport literal;
    try {
        half = relative_entropy_fields(times, series, EntropyConvention::half_girsanov);
        literal = relative_entropy_fields(times, series, EntropyConvention::paper_literal);
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string("entropy sampling rejected: ") + e.what());
    }

    ordered_json pathwise = nullptr;
    if (cfg.has("paths.K")) {
        stage = "pathwise";
        const std::uint64_t seed = require_seed(seed_opt, "entropy with [paths]");
        const std::uint32_t K = cfg.get_u32("paths.K");
        const double path_dt = cfg.get_double("paths.dt");
        require_on_lattice(T / static_cast<double>(samples - 1), path_dt, "paths");
        DriftTrajectory traj;
        traj.times = times;
        traj.provenance = DriftProvenance::limit_hartree;
        for (const MadelungFields& f : series) {
            traj.drifts.push_back(add(f.u, f.v));
        }
        const std::vector<double> x0 = sample_initial(series.front().rho, K, seed);
        EulerOptions eopts;
        eopts.seed = seed;
        eopts.snapshot_stride = cfg.get_u32("paths.snapshot_stride", 1);
        eopts.n_threads = cfg.get_u32("paths.threads", 1);
        const PathEnsemble ens = euler_maruyama(traj, x0, path_dt, eopts);
        const PathwiseKl pw_half =
            relative_entropy_pathwise(ens, traj, EntropyConvention::half_girsanov);
        const PathwiseKl pw_lit =
            relative_entropy_pathwise(ens, traj, EntropyConvention::paper_literal);
        half.kl_pathwise = pw_half.estimate;
        literal.kl_pathwise = pw_lit.estimate;
        pathwise = ordered_json::object();
        pathwise["K"] = K;
        pathwise["dt"] = path_dt;
        pathwise["half_girsanov"]["estimate"] = pw_half.estimate;
        pathwise["half_girsanov"]["std_error"] = pw_half.std_error;
        pathwise["paper_literal"]["estimate"] = pw_lit.estimate;
        pathwise["paper_literal"]["std_error"] = pw_lit.std_error;
        checks.add("pathwise_matches_quadrature",
                   std::abs(pw_half.estimate - half.kl_quadrature) <=
                       3.0 * pw_half.std_error + 1e-12);
    }

    stage = "artifacts";
    auto entropy_json = [](const EntropyReport& r) {
        ordered_json j;
        j["convention"] = entropy_convention_name(r.convention);
        j["H0"] = r.H0;
        j["HT"] = r.HT;
        j["kinetic_integral"] = r.kinetic_integral;
        j["kl_quadrature"] = r.kl_quadrature;
        j["kl_decomposed"] = r.kl_decomposed;
        j["closure_gap"] = r.closure_gap;
        j["kl_pathwise"] = r.kl_pathwise;
        j["excluded_mass"] = r.excluded_mass;
        return j;
    };
    report["source"] = source;
    report["T"] = T;
    report["samples"] = samples;
    report["grid"] = grid_json(grid);
    report["half_girsanov"] = entropy_json(half);
    report["paper_literal"] = entropy_json(literal);
    if (!pathwise.is_null()) {
        report["pathwise"] = pathwise;
    }

    const double tol_closure = cfg.get_double("tolerances.closure", 1e-6);
    checks.add("half_girsanov_closure", half.closure_gap <= tol_closure);
    checks.add("kl_nonnegative", half.kl_quadrature >= -1e-12);
}

// ---------------------------------------------------------------------------
// hierarchy: finite or infinite hierarchy residual with optional refinement.

void run_hierarchy(const Config& cfg, const std::optional<std::uint64_t>&,
                   const fs::path& out_dir, CheckSet& checks, ordered_json& report,
                   std::string& stage) {
    stage = "setup";
    const std::string mode = cfg.get_string("hierarchy.mode", "finite");
    const std::uint32_t n = cfg.get_u32("hierarchy.n", 1);
    const bool refine = cfg.get_bool("hierarchy.refine", false);
    const double L = cfg.get_double("grid.box_length");
    const std::uint32_t M = cfg.get_u32("grid.points");
    const double dt = cfg.get_double("solver.dt");
    const double T = cfg.get_double("solver.T");
    const double trap_omega = cfg.get_double("solver.trap_omega", 0.0);
    const PairPotential pot = make_potential(cfg.get_string("potential.kind"),
                                             cfg.get_double("potential.strength"),
                                             cfg.get_double("potential.width", 1.0));
    const std::size_t samples = solver_samples(cfg, 9);
    if (samples < 3) {
        throw config_error("hierarchy needs solver.samples >= 3 for the interior time slices");
    }

    std::uint32_t N = 0;
    if (mode == "finite") {
        N = cfg.get_u32("grid.particles", 0);
        if (N < 2 || n < 1 || n >= N) {
            throw config_error("finite hierarchy needs grid.particles >= 2 and 1 <= hierarchy.n < grid.particles");
        }
    } else if (mode == "infinite") {
        if (n < 1) {
            throw config_error("hierarchy.n must be at least 1");
        }
    } else {
        throw config_error("hierarchy.mode must be finite or infinite");
    }

    auto run_once = [&](double dt_k, std::size_t samples_k) -> HierarchyReport {
        if (mode == "finite") {
            SchrodingerProblem problem;
            problem.grid = build_grid(L, M, N);
            problem.n_particles = N;
            problem.potential = pot;
            problem.mode = SolverMode::linear_nbody;
            problem.dt = dt_k;
            problem.T = T;
            problem.trap_omega = trap_omega;
            const EvolveResult res = solve_from_config(cfg, problem, samples_k);
            std::vector<MadelungFields> full;
            std::vector<MarginalSet> margs;
            std::vector<RealField> rho_np1;
            full.reserve(res.states.size());
            std::vector<std::uint32_t> drop_axes;
            for (std::uint32_t a = n + 1; a < N; ++a) drop_axes.push_back(a);
            for (const ComplexField& psi : res.states) {
                MadelungFields f = extract(psi);
                margs.push_back(marginalize(f, n));
                rho_np1.push_back(drop_axes.empty() ? f.rho : integrate_axes(f.rho, drop_axes));
                full.push_back(std::move(f));
            }
            return finite_hierarchy_residual(N, n, res.times, full, margs, rho_np1, pot);
        }
        SchrodingerProblem problem;
        problem.grid = build_grid(L, M, 1);
        problem.n_particles = 1;
        problem.potential = pot;
        problem.mode = SolverMode::hartree;
        problem.dt = dt_k;
        problem.T = T;
        problem.trap_omega = trap_omega;
        const EvolveResult res = solve_from_config(cfg, problem, samples_k);
        return infinite_hierarchy_residual(n, res.times, res.states, pot);
    };

    stage = "residual";
    const HierarchyReport coarse = run_once(dt, samples);

    auto report_json = [](const HierarchyReport& r) {
        ordered_json j;
        j["N"] = r.N;
        j["n"] = r.n;
        j["velocity_residual"] = r.velocity_residual;
        j["continuity_residual"] = r.continuity_residual;
        j["excluded_mass"] = r.excluded_mass;
        ordered_json terms = ordered_json::object();
        for (const HierarchyTerm& t : r.terms) {
            terms[t.name] = t.magnitude;
        }
        j["terms"] = terms;
        return j;
    };
    report["mode"] = mode;
    report["coarse"] = report_json(coarse);
    report["coarse"]["dt"] = dt;
    report["coarse"]["samples"] = samples;
    checks.add("residual_finite",
               std::isfinite(coarse.velocity_residual) && std::isfinite(coarse.continuity_residual));

    if (refine) {
        stage = "refine";
        const std::size_t fine_samples = 2 * samples - 1;
        const HierarchyReport fine = run_once(0.5 * dt, fine_samples);
        const double ratio =
            coarse.velocity_residual / std::max(fine.velocity_residual, 1e-300);
        const double cont_ratio =
            coarse.continuity_residual / std::max(fine.continuity_residual, 1e-300);
        report["fine"] = report_json(fine);
        report["fine"]["dt"] = 0.5 * dt;
        report["fine"]["samples"] = fine_samples;
        report["refinement_ratio"] = ratio;
        report["continuity_refinement_ratio"] = cont_ratio;
        const double tol_ratio = cfg.get_double("tolerances.refine_ratio", 2.0);
        checks.add("residual_decays_under_refinement", ratio >= tol_ratio);
    }

    stage = "artifacts";
    write_text_file(out_dir / "hierarchy_terms.csv", [&] {
        std::string csv = "term,magnitude\n";
        for (const HierarchyTerm& t : coarse.terms) {
            csv += t.name + "," + fmt17(t.magnitude) + "\n";
        }
        csv += "velocity_residual," + fmt17(coarse.velocity_residual) + "\n";
        csv += "continuity_residual," + fmt17(coarse.continuity_residual) + "\n";
        return csv;
    }());
}

// ---------------------------------------------------------------------------
// converge: closed-form N sweep against the mean-field limit, optionally with
// a common-random-number path-law comparison.

void run_converge(const Config& cfg, const std::optional<std::uint64_t>& seed_opt,
                  const fs::path& out_dir, CheckSet& checks, ordered_json& report,
                  std::string& stage) {
    stage = "sweep";
    QuadraticModel model = model_from_config(cfg);
    const std::vector<std::uint32_t> N_list = cfg.get_u32_list("sweep.N_list");
    if (N_list.size() < 2) {
        throw config_error("sweep.N_list needs at least two entries");
    }
    for (std::size_t i = 0; i < N_list.size(); ++i) {
        if (N_list[i] < 2 || (i > 0 && N_list[i] <= N_list[i - 1])) {
            throw config_error("sweep.N_list must be strictly increasing with entries >= 2");
        }
    }
    const double t_eval = cfg.get_double("sweep.t_eval", 0.5);
    const GaussianMarginal limit = hartree_limit(model, t_eval);
    const double limit_var = limit.sigma.entry(0, 0);
    const double limit_kin = marginal_kinetic(limit);
    const double limit_pair = model.coupling_g * limit_var;

    std::vector<double> w1s;
    std::vector<double> kin_gaps;
    std::vector<double> pair_gaps;
    std::string csv = "N,w1,kinetic_gap,pair_gap\n";
    ordered_json rows = ordered_json::array();
    for (std::uint32_t N : N_list) {
        model.N = N;
        const GaussianState state = solve_quadratic(model, {t_eval}).front();
        const GaussianMarginal marg = exact_marginal(state, 1);
        const OracleEnergy energy = exact_entropy_energy(state);
        const double w1 =
            gaussian_w1(marg.mean, marg.sigma.entry(0, 0), limit.mean, limit_var);
        const double kin_gap = std::abs(energy.kinetic / N - limit_kin);
        const double pair_gap = std::abs(energy.potential_pair / N - limit_pair);
        w1s.push_back(w1);
        kin_gaps.push_back(kin_gap);
        pair_gaps.push_back(pair_gap);
        csv += std::to_string(N) + "," + fmt17(w1) + "," + fmt17(kin_gap) + "," +
               fmt17(pair_gap) + "\n";
        ordered_json row;
        row["N"] = N;
        row["w1"] = w1;
        row["kinetic_gap"] = kin_gap;
        row["pair_gap"] = pair_gap;
        rows.push_back(row);
    }
    write_text_file(out_dir / "convergence.csv", csv);

    bool w1_decreasing = true;
    for (std::size_t i = 1; i < w1s.size(); ++i) {
        w1_decreasing = w1_decreasing && w1s[i] < w1s[i - 1];
    }
    bool ratios_in_band = true;
    ordered_json ratio_rows = ordered_json::array();
    for (std::size_t i = 1; i < N_list.size(); ++i) {
        if (N_list[i] == 2 * N_list[i - 1] && w1s[i - 1] > 0.0) {
            const double r = w1s[i] / w1s[i - 1];
            ratios_in_band = ratios_in_band && r >= 0.3 && r <= 0.7;
            ordered_json row;
            row["N_from"] = N_list[i - 1];
            row["N_to"] = N_list[i];
            row["ratio"] = r;
            ratio_rows.push_back(row);
        }
    }
    const double slack_kin = 1e-12 * std::max(1.0, kin_gaps.front());
    const double slack_pair = 1e-12 * std::max(1.0, pair_gaps.front());
    bool energy_decreasing = true;
    for (std::size_t i = 1; i < N_list.size(); ++i) {
        energy_decreasing = energy_decreasing && kin_gaps[i] <= kin_gaps[i - 1] + slack_kin &&
                            pair_gaps[i] <= pair_gaps[i - 1] + slack_pair;
    }
    std::vector<double> N_double(N_list.begin(), N_list.end());
    const double slope = fitted_log_slope(N_double, w1s);

    report["hypothesis_flag"] = kOracleHypothesisFlag;
    report["t_eval"] = t_eval;
    report["limit"]["variance"] = limit_var;
    report["limit"]["per_particle_kinetic"] = limit_kin;
    report["limit"]["per_particle_pair"] = limit_pair;
    report["rows"] = rows;
    report["halving_ratios"] = ratio_rows;
    report["fitted_slope"] = slope;
    checks.add("w1_strictly_decreasing", w1_decreasing);
    checks.add("halving_ratio_in_band", ratios_in_band);
    checks.add("energy_gaps_nonincreasing", energy_decreasing);
    checks.add("fitted_slope_in_band", slope >= -1.5 && slope <= -0.5);

    if (!cfg.has("sweep.path_N_list")) {
        return;
    }

    stage = "path_law";
    const std::uint64_t seed = require_seed(seed_opt, "converge with sweep.path_N_list");
    const std::vector<std::uint32_t> path_N = cfg.get_u32_list("sweep.path_N_list");
    for (std::size_t i = 0; i < path_N.size(); ++i) {
        if (path_N[i] < 2 || (i > 0 && path_N[i] <= path_N[i - 1])) {
            throw config_error("sweep.path_N_list must be strictly increasing with entries >= 2");
        }
    }
    const double path_T = cfg.get_double("sweep.path_T", 0.5);
    const std::size_t slices = cfg.get_u32("sweep.drift_samples", 51);
    if (slices < 2) {
        throw config_error("sweep.drift_samples must be at least 2");
    }
    const double path_dt = cfg.get_double("paths.dt");
    const std::uint32_t K = cfg.get_u32("paths.K");
    require_on_lattice(path_T / static_cast<double>(slices - 1), path_dt, "paths");
    const Grid grid = build_grid(cfg.get_double("grid.box_length"), cfg.get_u32("grid.points"), 1);
    const ProbeBattery battery(grid);
    const std::vector<double> slice_times = uniform_times(path_T, slices);

    EulerOptions eopts;
    eopts.seed = seed;
    eopts.snapshot_stride = cfg.get_u32("paths.snapshot_stride", 1);
    eopts.n_threads = cfg.get_u32("paths.threads", 1);

    DriftTrajectory limit_traj;
    limit_traj.times = slice_times;
    limit_traj.provenance = DriftProvenance::limit_hartree;
    for (double t : slice_times) {
        limit_traj.drifts.push_back(render_marginal_drift(hartree_limit(model, t), grid));
    }
    const RealField rho0 = render_marginal_density(hartree_limit(model, 0.0), grid);
    const std::vector<double> x0 = sample_initial(rho0, K, seed);
    const PathEnsemble limit_ens = euler_maruyama(limit_traj, x0, path_dt, eopts);

    std::vector<double> fdd_max;
    std::vector<std::vector<double>> func_gaps;
    std::vector<std::vector<double>> func_ses;
    ordered_json path_rows = ordered_json::array();
    for (std::uint32_t N : path_N) {
        model.N = N;
        const std::vector<GaussianState> states = solve_quadratic(model, slice_times);
        DriftTrajectory cond;
        cond.times = slice_times;
        cond.provenance = DriftProvenance::conditioned_Nn;
        for (const GaussianState& st : states) {
            cond.drifts.push_back(render_marginal_drift(exact_marginal(st, 1), grid));
        }
        // The n = 1 marginal at t = 0 is the same Gaussian for every N, so the
        // common seed gives common initial points and common noise: the gap is
        // purely drift-induced.
        const PathEnsemble ens = euler_maruyama(cond, x0, path_dt, eopts);
        const PathLawReport plr = path_law_consistency(ens, limit_ens, battery);
        double fmax = 0.0;
        for (double w : plr.fdd_w1) fmax = std::max(fmax, w);
        fdd_max.push_back(fmax);
        func_gaps.push_back(plr.functional_gap);
        func_ses.push_back(plr.functional_se);
        ordered_json row;
        row["N"] = N;
        row["times"] = plr.times;
        row["fdd_w1"] = plr.fdd_w1;
        row["functional_gap"] = plr.functional_gap;
        row["functional_se"] = plr.functional_se;
        path_rows.push_back(row);
    }

    bool fdd_decreasing = true;
    const double w1_slack = 3.0 / std::sqrt(static_cast<double>(K));
    for (std::size_t i = 1; i < fdd_max.size(); ++i) {
        fdd_decreasing = fdd_decreasing && fdd_max[i] <= fdd_max[i - 1] + w1_slack;
    }
    bool func_decreasing = true;
    for (std::size_t i = 1; i < func_gaps.size(); ++i) {
        for (std::size_t e = 0; e < func_gaps[i].size(); ++e) {
            const double slack =
                3.0 * std::sqrt(func_ses[i][e] * func_ses[i][e] +
                                func_ses[i - 1][e] * func_ses[i - 1][e]);
            func_decreasing =
                func_decreasing && func_gaps[i][e] <= func_gaps[i - 1][e] + slack;
        }
    }
    report["path_law"]["probe_battery"] = ProbeBattery::id();
    report["path_law"]["K"] = K;
    report["path_law"]["dt"] = path_dt;
    report["path_law"]["T"] = path_T;
    report["path_law"]["rows"] = path_rows;
    checks.add("path_fdd_gaps_decreasing", fdd_decreasing);
    checks.add("path_functional_gaps_decreasing", func_decreasing);
}

} // namespace

Grid grid_from_config(const Config& cfg) {
    try {
        return build_grid(cfg.get_double("grid.box_length"), cfg.get_u32("grid.points"),
                          cfg.get_u32("grid.particles", 1));
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string("grid rejected: ") + e.what());
    }
}

SchrodingerProblem problem_from_config(const Config& cfg) {
    SchrodingerProblem p;
    p.grid = grid_from_config(cfg);
    p.n_particles = cfg.get_u32("grid.particles", 1);
    p.potential = make_potential(cfg.get_string("potential.kind"),
                                 cfg.get_double("potential.strength"),
                                 cfg.get_double("potential.width", 1.0));
    const std::string mode = cfg.get_string("solver.mode");
    if (mode == "linear_nbody") {
        p.mode = SolverMode::linear_nbody;
    } else if (mode == "hartree") {
        p.mode = SolverMode::hartree;
        if (p.n_particles != 1) {
            throw config_error("solver.mode = hartree needs grid.particles = 1");
        }
    } else {
        throw config_error("solver.mode must be linear_nbody or hartree");
    }
    p.dt = cfg.get_double("solver.dt");
    p.T = cfg.get_double("solver.T", 1.0);
    p.trap_omega = cfg.get_double("solver.trap_omega", 0.0);
    if (!(p.dt > 0.0) || !(p.T > 0.0)) {
        throw config_error("solver.dt and solver.T must be positive");
    }
    return p;
}

ComplexField initial_state_from_config(const Config& cfg, const Grid& grid) {
    const std::string kind = cfg.get_string("initial.kind", "gaussian");
    if (kind == "gaussian") {
        const double mean = cfg.get_double("initial.mean", 0.0);
        const double variance = cfg.get_double("initial.variance", 0.5);
        const double curvature = cfg.get_double("initial.phase_curvature", 0.0);
        const double momentum = cfg.get_double("initial.momentum", 0.0);
        if (!(variance > 0.0)) {
            throw config_error("initial.variance must be positive");
        }
        const cplx a{0.5 / variance, curvature};
        const std::uint32_t D = grid.total_dims;
        return normalized(ComplexField::from_function(grid, [&](const double* x) {
            cplx expo{0.0, 0.0};
            for (std::uint32_t axis = 0; axis < D; ++axis) {
                const double d = x[axis] - mean;
                expo += -0.5 * a * d * d + cplx{0.0, momentum * d};
            }
            return std::exp(expo);
        }));
    }
    if (kind == "plane_wave") {
        const double mode_raw = cfg.get_double("initial.momentum_mode", 1.0);
        const double mode = static_cast<double>(std::llround(mode_raw));
        if (std::abs(mode_raw - mode) > 1e-9) {
            throw config_error("initial.momentum_mode must be an integer (box periodicity)");
        }
        const double k = 2.0 * std::numbers::pi * mode / grid.box_length;
        const std::uint32_t D = grid.total_dims;
        return normalized(ComplexField::from_function(grid, [&](const double* x) {
            double phase = 0.0;
            for (std::uint32_t axis = 0; axis < D; ++axis) {
                phase += k * x[axis];
            }
            return std::exp(cplx{0.0, phase});
        }));
    }
    throw config_error("initial.kind must be gaussian or plane_wave");
}

QuadraticModel model_from_config(const Config& cfg) {
    QuadraticModel m;
    m.N = cfg.get_u32("model.N", 1);
    m.trap_omega = cfg.get_double("model.trap_omega", 1.0);
    m.coupling_g = cfg.get_double("model.coupling_g", 0.0);
    m.mean0 = cfg.get_double("model.mean0", 0.0);
    m.variance0 = cfg.get_double("model.variance0", 0.5);
    m.phase_curvature0 = cfg.get_double("model.phase_curvature0", 0.0);
    return m;
}

MadelungFields oracle_fields_on_grid(const GaussianMarginal& m, const Grid& grid) {
    RealField rho = render_marginal_density(m, grid);
    const VectorField u_raw = render_marginal_osmotic(m, grid);
    const VectorField v_raw = render_marginal_velocity(m, grid);
    const double eps = kNodeEpsRel * rho.max();
    const std::uint32_t D = grid.total_dims;
    std::vector<bool> mask(grid.size(), false);
    std::vector<std::vector<double>> u_comp(D), v_comp(D), j_comp(D);
    for (std::uint32_t c = 0; c < D; ++c) {
        u_comp[c] = u_raw.component(c);
        v_comp[c] = v_raw.component(c);
        j_comp[c].assign(grid.size(), 0.0);
    }
    double node_mass = 0.0;
    double weight = 1.0;
    for (std::uint32_t c = 0; c < D; ++c) weight *= grid.spacing;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (rho[i] < eps) {
            mask[i] = true;
            node_mass += rho[i] * weight;
            for (std::uint32_t c = 0; c < D; ++c) {
                u_comp[c][i] = 0.0;
                v_comp[c][i] = 0.0;
            }
        } else {
            for (std::uint32_t c = 0; c < D; ++c) {
                j_comp[c][i] = rho[i] * v_comp[c][i];
            }
        }
    }
    MadelungFields out;
    out.rho = std::move(rho);
    out.j = VectorField(grid, std::move(j_comp));
    out.u = VectorField(grid, std::move(u_comp));
    out.v = VectorField(grid, std::move(v_comp));
    out.node_mask = std::move(mask);
    out.eps_node = eps;
    out.node_mass = node_mass;
    return out;
}

PathLawReport path_law_consistency(const PathEnsemble& a, const PathEnsemble& b,
                                   const ProbeBattery& battery) {
    if (a.dims != b.dims || a.n_paths != b.n_paths ||
        a.frame_times.size() != b.frame_times.size()) {
        throw std::invalid_argument(
            "path-law comparison needs matching dimensions, path counts and frame counts");
    }
    if (std::abs(a.dt - b.dt) > 1e-12 || std::abs(a.box_length - b.box_length) > 1e-12) {
        throw std::invalid_argument("path-law comparison needs matching dt and box length");
    }
    for (std::size_t f = 0; f < a.frame_times.size(); ++f) {
        if (std::abs(a.frame_times[f] - b.frame_times[f]) >
            1e-9 * std::max(1.0, std::abs(a.frame_times[f]))) {
            throw std::invalid_argument("path-law comparison rejected: mismatched horizons");
        }
    }
    if (a.n_paths < 2) {
        throw std::invalid_argument("path-law comparison needs at least two paths");
    }
    if (battery.probe(0).grid().total_dims != a.dims) {
        throw std::invalid_argument("probe battery dimension does not match the ensembles");
    }

    PathLawReport out;
    const double T0 = a.frame_times.front();
    const double T1 = a.frame_times.back();
    std::vector<std::size_t> eval_frames;
    for (double q : {0.0, 0.25, 0.5, 1.0}) {
        const std::size_t f = nearest_index(a.frame_times, T0 + q * (T1 - T0));
        if (eval_frames.empty() || eval_frames.back() != f) {
            eval_frames.push_back(f);
        }
    }
    const std::size_t K = a.n_paths;
    for (std::size_t f : eval_frames) {
        std::vector<double> xa(K), xb(K);
        for (std::size_t p = 0; p < K; ++p) {
            xa[p] = a.position(f, p, 0);
            xb[p] = b.position(f, p, 0);
        }
        out.times.push_back(a.frame_times[f]);
        out.fdd_w1.push_back(w1_distance(std::move(xa), std::move(xb)));
    }

    // Stochastic-integral functionals sum phi(X_f) dX^0_f over the snapshot
    // frames, increments taken as minimal-image differences (per-frame motion
    // is far below half a box for any sane step).
    const std::size_t F = a.frame_times.size();
    const std::uint32_t D = a.dims;
    std::vector<double> point(D);
    for (std::size_t e = 0; e < battery.size(); ++e) {
        std::vector<double> sums_a(K, 0.0), sums_b(K, 0.0);
        for (std::size_t p = 0; p < K; ++p) {
            for (std::size_t f = 0; f + 1 < F; ++f) {
                for (std::uint32_t c = 0; c < D; ++c) point[c] = a.position(f, p, c);
                sums_a[p] += battery.evaluate(e, point.data()) *
                             periodic_difference(a.position(f + 1, p, 0), a.position(f, p, 0),
                                                 a.box_length);
                for (std::uint32_t c = 0; c < D; ++c) point[c] = b.position(f, p, c);
                sums_b[p] += battery.evaluate(e, point.data()) *
                             periodic_difference(b.position(f + 1, p, 0), b.position(f, p, 0),
                                                 b.box_length);
            }
        }
        const double kd = static_cast<double>(K);
        const double mean_a = sample_mean(sums_a);
        const double mean_b = sample_mean(sums_b);
        const double se_a = std::sqrt(sample_variance(sums_a, mean_a) * kd / (kd - 1.0) / kd);
        const double se_b = std::sqrt(sample_variance(sums_b, mean_b) * kd / (kd - 1.0) / kd);
        out.functional_gap.push_back(std::abs(mean_a - mean_b));
        out.functional_se.push_back(std::sqrt(se_a * se_a + se_b * se_b));
    }
    return out;
}

int run_experiment(const CliOptions& opts) {
    const Config cfg = Config::parse_file(opts.config_path);
    const auto it = schemas().find(opts.experiment);
    if (it == schemas().end()) {
        std::string known;
        for (const auto& [name, schema] : schemas()) {
            if (!known.empty()) known += ", ";
            known += name;
        }
        throw config_error("unknown experiment '" + opts.experiment + "' (known: " + known + ")");
    }
    cfg.validate(it->second.allowed, it->second.required);
    if (cfg.has("run.experiment") && cfg.get_string("run.experiment") != opts.experiment) {
        throw config_error("config declares experiment '" + cfg.get_string("run.experiment") +
                           "' but '" + opts.experiment + "' was requested");
    }

    std::optional<std::uint64_t> seed = opts.seed_override;
    if (!seed && cfg.has("run.seed")) {
        seed = cfg.get_u64("run.seed");
    }
    const std::string out_dir_s =
        opts.out_override ? *opts.out_override
                          : cfg.get_string("run.output_dir", "out/" + opts.experiment);
    const fs::path out_dir(out_dir_s);
    fs::create_directories(out_dir);
    std::error_code ec;
    fs::remove(out_dir / "FAILED", ec);

    ordered_json manifest;
    manifest["tool"] = "nelsonium";
    manifest["version"] = NELSONIUM_VERSION;
    manifest["git_describe"] = NELSONIUM_GIT_DESCRIBE;
    manifest["experiment"] = opts.experiment;
    manifest["config_path"] = opts.config_path;
    manifest["config_hash_fnv1a"] = fnv1a_hex(cfg.raw_text());
    if (seed) {
        manifest["seed"] = *seed;
    } else {
        manifest["seed"] = nullptr;
    }
    manifest["output_dir"] = out_dir_s;
    manifest["threads"] = cfg.get_u32("paths.threads", 1);
    write_json_file(out_dir / "manifest.json", manifest);

    CheckSet checks;
    ordered_json report;
    report["experiment"] = opts.experiment;
    std::string stage = "setup";
    try {
        if (opts.experiment == "evolve") {
            run_evolve(cfg, seed, out_dir, checks, report, stage);
        } else if (opts.experiment == "fields") {
            run_fields(cfg, seed, out_dir, checks, report, stage);
        } else if (opts.experiment == "marginals") {
            run_marginals(cfg, seed, out_dir, checks, report, stage);
        } else if (opts.experiment == "sample") {
            run_sample(cfg, seed, out_dir, checks, report, stage);
        } else if (opts.experiment == "entropy") {
            run_entropy(cfg, seed, out_dir, checks, report, stage);
        } else if (opts.experiment == "hierarchy") {
            run_hierarchy(cfg, seed, out_dir, checks, report, stage);
        } else {
            run_converge(cfg, seed, out_dir, checks, report, stage);
        }
    } catch (...) {
        write_text_file(out_dir / "FAILED", "stage: " + stage + "\n");
        throw;
    }

    report["checks"] = checks.to_json();
    const bool pass = checks.all_pass();
    report["pass"] = pass;
    write_json_file(out_dir / "report.json", report);
    if (!pass) {
        write_text_file(out_dir / "FAILED",
                        "stage: checks\nfailed: " + checks.failed_names() + "\n");
    }
    return pass ? 0 : 1;
}

} // namespace nelsonium
