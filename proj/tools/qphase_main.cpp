// qphase: build truncated Fock-space states, compute Q / Husimi / Wigner
// distributions and their marginals, run the Weyl-vs-Berezin expectation
// pipelines, evolve states in time, and simulate pointer measurements.
// Emits plot-ready CSV plus JSON manifests; identical flags give
// byte-identical outputs.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "qphase/qphase.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace qphase;

namespace {

struct RunConfig {
    double hbar = 1.0, mass = 1.0, omega = 1.0;
    int dim = 32;
    double grid_radius = 6.0;
    int grid_samples = 121;
    std::string measure = "alpha"; // alpha | qp
    std::string out = ".";
    unsigned long long seed = 0;
};

ModeSpace space_of(const RunConfig& cfg) {
    return ModeSpace(cfg.dim, cfg.hbar, cfg.mass, cfg.omega);
}

Measure measure_of(const RunConfig& cfg) {
    return cfg.measure == "qp" ? Measure::QP : Measure::Alpha2;
}

ordered_json config_json(const RunConfig& cfg) {
    return {{"hbar", cfg.hbar},
            {"mass", cfg.mass},
            {"omega", cfg.omega},
            {"dim", cfg.dim},
            {"grid_radius", cfg.grid_radius},
            {"grid_samples", cfg.grid_samples},
            {"measure", cfg.measure},
            {"out", cfg.out},
            {"seed", cfg.seed}};
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_grid_csv(const fs::path& path, const PhaseDistribution& dist) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << "re_alpha,im_alpha,value\n";
    const long n = dist.grid.total_points();
    for (long i = 0; i < n; ++i) {
        const PhasePoint pt = dist.grid.point_at(i);
        for (const Complex& a : pt.alphas) f << fmt(a.real()) << ',' << fmt(a.imag()) << ',';
        f << fmt(dist.values(i)) << '\n';
    }
}

void write_profile_csv(const fs::path& path, const Eigen::VectorXd& axis,
                       const Eigen::VectorXd& values) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << "q,value\n";
    for (long i = 0; i < axis.size(); ++i) f << fmt(axis(i)) << ',' << fmt(values(i)) << '\n';
}

void write_json(const fs::path& path, const ordered_json& j) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << j.dump(2) << '\n';
}

ordered_json grid_json(const PhaseGrid& grid) {
    ordered_json axes = ordered_json::array();
    for (const auto& ax : grid.axes)
        axes.push_back({{"radius", ax.radius}, {"samples", ax.samples}, {"step", ax.step()}});
    return {{"axes", axes}, {"modes", grid.space.modes()}};
}

Complex grid_centroid(const PhaseDistribution& dist) {
    // first moment of alpha in the d^2alpha measure
    const double mf = (dist.measure == Measure::QP) ? qp_jacobian(dist.grid.space) : 1.0;
    Complex acc = 0.0;
    for (long i = 0; i < dist.grid.total_points(); ++i)
        acc += dist.grid.weight_alpha(i) * dist.values(i) * dist.grid.point_at(i).alphas[0];
    return acc * mf;
}

int run_dist(const RunConfig& cfg, const std::string& state_spec, const std::string& kind,
             double kappa) {
    const ModeSpace space = space_of(cfg);
    const ParsedState st = parse_state(space, state_spec);
    const PhaseGrid grid = default_grid(space, cfg.grid_radius, cfg.grid_samples);
    const Measure measure = measure_of(cfg);
    PhaseDistribution dist = [&] {
        if (kind == "q") return q_distribution(st.rho, grid, measure);
        if (kind == "wigner") return wigner_distribution(st.rho, grid, measure);
        const double kap = kappa > 0.0 ? kappa : cfg.omega;
        return weierstrass_transform(wigner_distribution(st.rho, grid, measure), kap);
    }();
    fs::create_directories(cfg.out);
    write_grid_csv(fs::path(cfg.out) / "dist.csv", dist);
    ordered_json manifest = {{"kind", kind},
                             {"kappa", dist.kappa},
                             {"measure", cfg.measure},
                             {"state", state_spec},
                             {"grid", grid_json(grid)},
                             {"integral", integrate(dist)},
                             {"min", dist.values.minCoeff()},
                             {"max", dist.values.maxCoeff()},
                             {"file", "dist.csv"},
                             {"config", config_json(cfg)}};
    write_json(fs::path(cfg.out) / "dist.json", manifest);
    std::cout << "wrote dist.csv (integral " << fmt(manifest["integral"].get<double>()) << ", min "
              << fmt(manifest["min"].get<double>()) << ")\n";
    return 0;
}

int run_expect(const RunConfig& cfg, const std::string& state_spec, const std::string& poly,
               const std::string& pipeline) {
    const ModeSpace space = space_of(cfg);
    const ParsedState st = parse_state(space, state_spec);
    const PhasePolynomial f = parse_phase_polynomial(poly);
    std::optional<Complex> weyl, berezin;
    if (pipeline == "weyl" || pipeline == "both") {
        TraceExpectation t = expectation_trace(st.rho, weyl_quantize(f));
        if (t.truncation_warning)
            std::cerr << "warning: operator may climb past the truncation edge; raise --dim\n";
        weyl = t.value;
    }
    if (pipeline == "berezin" || pipeline == "both")
        berezin = expectation_via_q(st.rho, berezin_quantize(f));
    std::cout << "pipeline        value\n";
    if (weyl) std::cout << "trace(weyl)     " << fmt(weyl->real()) << '\n';
    if (berezin) std::cout << "q(berezin)      " << fmt(berezin->real()) << '\n';
    if (weyl && berezin) std::cout << "discrepancy     " << fmt((*weyl - *berezin).real()) << '\n';
    return 0;
}

int run_marginals(const RunConfig& cfg, const std::string& state_spec) {
    const ModeSpace space = space_of(cfg);
    const ParsedState st = parse_state(space, state_spec);
    const PhaseGrid grid = default_grid(space, cfg.grid_radius, cfg.grid_samples);
    fs::create_directories(cfg.out);
    ordered_json files = ordered_json::array();

    const PhaseDistribution q = q_distribution(st.rho, grid, Measure::QP);
    const SpatialProfile qm = q_marginals(q);
    write_profile_csv(fs::path(cfg.out) / "q_density.csv", qm.axis, qm.density);
    write_profile_csv(fs::path(cfg.out) / "q_current.csv", qm.axis, qm.current);
    files.push_back("q_density.csv");
    files.push_back("q_current.csv");

    ordered_json manifest = {{"state", state_spec},
                             {"grid", grid_json(grid)},
                             {"q_density_at_0", qm.density(qm.density.size() / 2)},
                             {"config", config_json(cfg)}};
    if (st.pure) {
        const SpatialProfile pm = psi_profile(*st.pure, q_axis_of(grid));
        write_profile_csv(fs::path(cfg.out) / "psi_density.csv", pm.axis, pm.density);
        write_profile_csv(fs::path(cfg.out) / "psi_current.csv", pm.axis, pm.current);
        files.push_back("psi_density.csv");
        files.push_back("psi_current.csv");
        manifest["psi_density_at_0"] = pm.density(pm.density.size() / 2);
    }
    manifest["files"] = files;
    write_json(fs::path(cfg.out) / "marginals.json", manifest);
    std::cout << "wrote " << files.size() << " profiles\n";
    return 0;
}

int run_evolve(const RunConfig& cfg, const std::string& state_spec, const std::string& h_spec,
               double t_final, int steps, bool continuity) {
    const ModeSpace space = space_of(cfg);
    const ParsedState st = parse_state(space, state_spec);
    const OperatorMatrix h = parse_hamiltonian(space, h_spec);
    const PhaseGrid grid = default_grid(space, cfg.grid_radius, cfg.grid_samples);
    const Measure measure = measure_of(cfg);
    const Trajectory traj = evolve(st.rho, h, t_final, steps);

    fs::create_directories(cfg.out);
    ordered_json files = ordered_json::array();
    ordered_json integrals = ordered_json::array();
    std::vector<SpatialProfile> profiles;
    Complex centroid;
    for (std::size_t s = 0; s < traj.states.size(); ++s) {
        const PhaseDistribution q = q_distribution(traj.states[s], grid, measure);
        char name[32];
        std::snprintf(name, sizeof name, "q_step_%03zu.csv", s);
        write_grid_csv(fs::path(cfg.out) / name, q);
        files.push_back(name);
        integrals.push_back(integrate(q));
        if (continuity) profiles.push_back(q_marginals(convert_measure(q, Measure::QP)));
        if (s + 1 == traj.states.size()) centroid = grid_centroid(q);
    }
    ordered_json manifest = {{"state", state_spec},
                             {"hamiltonian", h_spec},
                             {"t_final", t_final},
                             {"steps", steps},
                             {"times", traj.times},
                             {"grid", grid_json(grid)},
                             {"measure", cfg.measure},
                             {"files", files},
                             {"integrals", integrals},
                             {"final_centroid_re", centroid.real()},
                             {"final_centroid_im", centroid.imag()},
                             {"config", config_json(cfg)}};
    std::cout << "final centroid: " << fmt(centroid.real()) << (centroid.imag() < 0 ? " - " : " + ")
              << fmt(std::abs(centroid.imag())) << "i\n";

    if (continuity) {
        const ContinuityCheck coarse = continuity_residual(profiles, traj.times, space.mass[0]);
        // halved steps in both time and space for the order-of-accuracy ratio
        const PhaseGrid fine_grid =
            default_grid(space, cfg.grid_radius, 2 * cfg.grid_samples - 1);
        const Trajectory fine = evolve(st.rho, h, t_final, 2 * steps);
        std::vector<SpatialProfile> fine_profiles;
        for (const auto& state : fine.states)
            fine_profiles.push_back(q_marginals(q_distribution(state, fine_grid, Measure::QP)));
        const ContinuityCheck refined = continuity_residual(fine_profiles, fine.times, space.mass[0]);
        const double ratio = coarse.max_residual / refined.max_residual;
        manifest["continuity"] = {{"residual", coarse.max_residual},
                                  {"time_scale", coarse.time_scale},
                                  {"refined_residual", refined.max_residual},
                                  {"order_ratio", ratio}};
        std::cout << "continuity residual " << fmt(coarse.max_residual) << " (scale "
                  << fmt(coarse.time_scale) << "), order ratio " << fmt(ratio) << '\n';
    }
    write_json(fs::path(cfg.out) / "trajectory.json", manifest);
    return 0;
}

Complex json_complex(const nlohmann::json& v) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_object()) return {v.value("re", 0.0), v.value("im", 0.0)};
    if (v.is_string()) return parse_complex(v.get<std::string>());
    throw ParseError("experiment: bad complex value");
}

int run_measure(const RunConfig& cfg, const std::string& experiment_path, int condition) {
    std::ifstream in(experiment_path);
    if (!in) throw ParseError("experiment: cannot open " + experiment_path);
    nlohmann::json desc;
    try {
        in >> desc;
    } catch (const std::exception& e) {
        throw ParseError(std::string("experiment: invalid JSON: ") + e.what());
    }
    if (!desc.contains("amplitudes") || !desc.contains("regions"))
        throw ParseError("experiment: amplitudes and regions are required");

    std::vector<Complex> amps;
    for (const auto& v : desc["amplitudes"]) amps.push_back(json_complex(v));
    std::vector<PointerRegion> regions;
    double max_alpha = 0.0;
    int label = 1;
    for (const auto& r : desc["regions"]) {
        PointerRegion reg;
        reg.label = label++;
        reg.centre = Complex(r.value("centre_re", 0.0), r.value("centre_im", 0.0));
        reg.radius = r.value("radius", 3.0);
        regions.push_back(reg);
        max_alpha = std::max(max_alpha, std::abs(reg.centre) + reg.radius);
    }
    if (amps.size() != regions.size())
        throw ParseError("experiment: one region per amplitude required");

    const int n_out = static_cast<int>(amps.size());
    const int sys_dim = desc.value("system_dim", std::max(2, n_out));
    const int app_dim = desc.value("apparatus_dim", required_truncation(Complex(max_alpha, 0.0)) + 4);
    ModeSpace system(sys_dim, cfg.hbar, cfg.mass, cfg.omega);
    ModeSpace apparatus(app_dim, cfg.hbar, cfg.mass, cfg.omega);
    std::vector<StateVector> basis;
    for (int i = 0; i < n_out; ++i) basis.push_back(number_state(system, i));
    MeasurementModel model(system, apparatus, basis, amps, regions);
    if (desc.contains("mu_width")) model.mu_width = desc["mu_width"].get<double>();
    if (desc.contains("mu_support")) model.mu_support = desc["mu_support"].get<double>();
    if (desc.contains("allow_small_regions"))
        model.allow_small_regions = desc["allow_small_regions"].get<bool>();

    const double step = desc.value("grid_step", 0.125);
    const PhaseGrid app_grid = apparatus_grid(model, step);
    ordered_json p_table = ordered_json::array(), born_table = ordered_json::array();
    double max_error = 0.0, sum_p = 0.0;
    for (int j = 0; j < n_out; ++j) {
        const double p = pointer_probability(model, j, app_grid);
        const double born = std::norm(amps[j]);
        p_table.push_back({{"j", model.regions[j].label}, {"p", p}});
        born_table.push_back({{"j", model.regions[j].label}, {"born", born}});
        max_error = std::max(max_error, std::abs(p - born));
        sum_p += p;
        std::cout << "P(" << model.regions[j].label << ") = " << fmt(p) << "   |c|^2 = "
                  << fmt(born) << '\n';
    }
    std::cout << "max error " << fmt(max_error) << ", sum P " << fmt(sum_p) << '\n';

    ordered_json results = {{"p", p_table},
                            {"born", born_table},
                            {"max_error", max_error},
                            {"sum_p", sum_p},
                            {"system_dim", sys_dim},
                            {"apparatus_dim", app_dim},
                            {"grid", grid_json(app_grid)},
                            {"seed", desc.value("seed", static_cast<long long>(cfg.seed))},
                            {"config", config_json(cfg)}};

    if (condition > 0) {
        if (condition > n_out) throw ParseError("experiment: --condition outcome out of range");
        const int j = condition - 1;
        const int sys_samples = desc.value("sys_samples", 49);
        const double app_step = desc.value("joint_app_step", 0.3);
        const PhaseGrid sys_grid = default_grid(system, 6.0, sys_samples);
        double app_radius = 0.0;
        for (const auto& reg : model.regions)
            app_radius = std::max(app_radius, std::abs(reg.centre) + reg.radius + 2.0);
        const int app_samples = 2 * static_cast<int>(std::ceil(app_radius / app_step)) + 1;
        const PhaseGrid joint_app_grid = default_grid(apparatus, app_radius, app_samples);
        const PhaseDistribution joint = joint_q(model, sys_grid, joint_app_grid);
        const PhaseDistribution updated = bayesian_update(model, joint, j);
        const PhaseDistribution sys_marg = marginal_mode(updated, 0);
        const PhaseDistribution target = q_distribution(pure_density(basis[j]), sys_grid);
        const double sup = (sys_marg.values - target.values).cwiseAbs().maxCoeff();
        results["condition"] = {{"j", condition},
                                {"collapse_sup_distance", sup},
                                {"updated_integral", integrate(updated)}};
        std::cout << "collapse check (j = " << condition << "): sup distance " << fmt(sup) << '\n';
    }

    fs::create_directories(cfg.out);
    write_json(fs::path(cfg.out) / "results.json", results);
    return 0;
}

int run_overlap(const RunConfig& cfg, int n, int m) {
    const ModeSpace space = space_of(cfg);
    const double v = eigenstate_q_overlap(space, n, m);
    std::cout << "overlap(" << n << ", " << m << ") = " << fmt(v) << '\n';
    fs::create_directories(cfg.out);
    write_json(fs::path(cfg.out) / "overlap.json",
               {{"n", n}, {"m", m}, {"overlap", v}, {"config", config_json(cfg)}});
    return 0;
}

const char* error_name(const Error& e) {
    if (dynamic_cast<const ParseError*>(&e)) return "parse error";
    if (dynamic_cast<const IndexError*>(&e)) return "index error";
    if (dynamic_cast<const ScaleError*>(&e)) return "scale error";
    if (dynamic_cast<const TruncationError*>(&e)) return "truncation error";
    if (dynamic_cast<const MeasureError*>(&e)) return "measure error";
    if (dynamic_cast<const OrderingError*>(&e)) return "ordering error";
    if (dynamic_cast<const ExtentError*>(&e)) return "extent error";
    if (dynamic_cast<const GeometryError*>(&e)) return "geometry error";
    if (dynamic_cast<const ConditioningError*>(&e)) return "conditioning error";
    if (dynamic_cast<const SamplingError*>(&e)) return "sampling error";
    if (dynamic_cast<const UnsupportedError*>(&e)) return "unsupported";
    if (dynamic_cast<const DomainError*>(&e)) return "domain error";
    return "error";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qphase: phase-space distributions, operator ordering, dynamics and "
                 "pointer-measurement simulation on truncated Fock spaces"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    RunConfig cfg;
    app.add_option("--hbar", cfg.hbar, "Planck constant")->check(CLI::PositiveNumber);
    app.add_option("--mass", cfg.mass, "oscillator mass")->check(CLI::PositiveNumber);
    app.add_option("--omega", cfg.omega, "angular frequency")->check(CLI::PositiveNumber);
    app.add_option("--dim", cfg.dim, "Fock truncation per mode")->check(CLI::Range(2, 4096));
    app.add_option("--grid-radius", cfg.grid_radius, "grid half-extent in |alpha|")
        ->check(CLI::PositiveNumber);
    app.add_option("--grid-samples", cfg.grid_samples, "odd samples per grid axis");
    app.add_option("--measure", cfg.measure, "density measure")
        ->check(CLI::IsMember({"alpha", "qp"}));
    app.add_option("--out", cfg.out, "output directory");
    app.add_option("--seed", cfg.seed, "seed recorded in manifests");

    auto* dist = app.add_subcommand("dist", "evaluate a distribution on the grid");
    std::string state_spec, kind = "q";
    double kappa = -1.0;
    dist->add_option("--state", state_spec, "state spec")->required();
    dist->add_option("--kind", kind, "distribution kind")
        ->check(CLI::IsMember({"q", "wigner", "husimi"}));
    dist->add_option("--kappa", kappa, "husimi smoothing frequency (default: omega)");

    auto* expect = app.add_subcommand("expect", "expectation values through both pipelines");
    std::string poly, pipeline = "both";
    expect->add_option("--state", state_spec, "state spec")->required();
    expect->add_option("--poly", poly, "phase-space polynomial, e.g. \"q^2\"")->required();
    expect->add_option("--pipeline", pipeline, "which quantization pipeline")
        ->check(CLI::IsMember({"weyl", "berezin", "both"}));

    auto* marg = app.add_subcommand("marginals", "position density and current profiles");
    marg->add_option("--state", state_spec, "state spec")->required();

    auto* evolve_cmd = app.add_subcommand("evolve", "unitary evolution with Q-grid export");
    std::string h_spec = "harmonic";
    double t_final = 1.0;
    int steps = 10;
    bool continuity = false;
    evolve_cmd->add_option("--state", state_spec, "state spec")->required();
    evolve_cmd->add_option("--hamiltonian", h_spec, "harmonic | kerr chi=<x> | poly <ladder>");
    evolve_cmd->add_option("--tf", t_final, "final time")->required();
    evolve_cmd->add_option("--steps", steps, "number of uniform steps")->check(CLI::PositiveNumber);
    evolve_cmd->add_flag("--continuity", continuity, "print the continuity-equation residual");

    auto* measure_cmd = app.add_subcommand("measure", "pointer-measurement experiment");
    std::string experiment;
    int condition = 0;
    measure_cmd->add_option("--experiment", experiment, "experiment descriptor JSON")->required();
    measure_cmd->add_option("--condition", condition, "Bayesian update on outcome j (1-based)");

    auto* overlap_cmd = app.add_subcommand("overlap", "eigenstate Q-function overlap witness");
    int level_n = 0, level_m = 1;
    overlap_cmd->add_option("--n", level_n, "first Fock level")->required();
    overlap_cmd->add_option("--m", level_m, "second Fock level")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*dist) return run_dist(cfg, state_spec, kind, kappa);
        if (*expect) return run_expect(cfg, state_spec, poly, pipeline);
        if (*marg) return run_marginals(cfg, state_spec);
        if (*evolve_cmd) return run_evolve(cfg, state_spec, h_spec, t_final, steps, continuity);
        if (*measure_cmd) return run_measure(cfg, experiment, condition);
        if (*overlap_cmd) return run_overlap(cfg, level_n, level_m);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << error_name(e) << ": " << e.what() << '\n';
        return 3;
    }
    return 0;
}
