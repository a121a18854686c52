#pragma once

#include "swfe/analysis.hpp"
#include "swfe/assembly.hpp"
#include "swfe/config.hpp"
#include "swfe/io.hpp"
#include "swfe/model.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace swfe::cli {

namespace detail {

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

inline std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::istringstream in(csv);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::istringstream iss(item);
        int v = 0;
        iss >> v;
        std::string rest;
        if (iss.fail() || (iss >> rest && !rest.empty()) || v < 1)
            throw std::invalid_argument("expected a comma-separated list of positive integers, got '" + csv + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty refinement list");
    return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file '" + path.string() + "'");
    out << content;
}

inline std::filesystem::path ensure_output_dir(const RunConfig& cfg) {
    std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Registers the RunConfig-mirroring flags on a subcommand and resolves them
/// against an optional config file (flags win).
struct ConfigCli {
    CLI::App* sub = nullptr;
    std::string config_path, pair, mesh_file, output_dir, solver;
    int n = 0, nsteps = 0, snapshot_interval = 0;
    double perturb = 0, ro = 0, fr = 0, f = 0, g = 0, dbar = 0, dt = 0, tol = 0;
    std::uint64_t mesh_seed = 0, seed = 0;

    void attach(CLI::App* s) {
        sub = s;
        s->add_option("--config", config_path, "configuration file (key = value lines)");
        s->add_option("--pair", pair, "element pair: P0-P1, P1DG-P2, P2DG-P3, P1-P1");
        s->add_option("--n", n, "mesh subdivisions per side of the unit square");
        s->add_option("--perturb", perturb, "interior node perturbation, fraction of local edge length in [0,0.3]");
        s->add_option("--mesh-seed", mesh_seed, "seed for mesh perturbation");
        s->add_option("--mesh-file", mesh_file, "load mesh from file instead of generating");
        s->add_option("--ro", ro, "Rossby number (f = 1/Ro)");
        s->add_option("--fr", fr, "Froude number (g = 1/Fr^2)");
        s->add_option("--f", f, "Coriolis parameter, overrides --ro");
        s->add_option("--g", g, "gravity, overrides --fr");
        s->add_option("--dbar", dbar, "mean depth");
        s->add_option("--dt", dt, "timestep");
        s->add_option("--nsteps", nsteps, "number of steps");
        s->add_option("--seed", seed, "seed for the random initial state");
        s->add_option("--output-dir", output_dir, "output directory (default ./out)");
        s->add_option("--solver", solver, "linear solver: direct or iterative");
        s->add_option("--tol", tol, "iterative solver relative tolerance");
        s->add_option("--snapshot-interval", snapshot_interval, "write VTK fields every this many steps (0 = off)");
    }

    RunConfig resolve() const {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config_file(config_path);
        auto given = [&](const char* name) { return sub->count(name) > 0; };
        if (given("--pair")) cfg.pair = pair;
        if (given("--n")) cfg.n = n;
        if (given("--perturb")) cfg.perturb = perturb;
        if (given("--mesh-seed")) cfg.mesh_seed = mesh_seed;
        if (given("--mesh-file")) cfg.mesh_file = mesh_file;
        if (given("--ro")) cfg.ro = ro;
        if (given("--fr")) cfg.fr = fr;
        if (given("--f")) cfg.f_override = f;
        if (given("--g")) cfg.g_override = g;
        if (given("--dbar")) cfg.dbar_override = dbar;
        if (given("--dt")) cfg.dt = dt;
        if (given("--nsteps")) cfg.nsteps = nsteps;
        if (given("--seed")) cfg.seed = seed;
        if (given("--output-dir")) cfg.output_dir = output_dir;
        if (given("--solver")) {
            if (solver == "direct")
                cfg.solver = SolverKind::direct;
            else if (solver == "iterative")
                cfg.solver = SolverKind::iterative;
            else
                throw std::invalid_argument("solver must be 'direct' or 'iterative'");
        }
        if (given("--tol")) cfg.tol = tol;
        if (given("--snapshot-interval")) cfg.snapshot_interval = snapshot_interval;
        validate(cfg);
        return cfg;
    }

    static void validate(const RunConfig& cfg) {
        if (!is_known_pair(cfg.pair)) throw std::invalid_argument("unknown pair '" + cfg.pair + "'");
        if (cfg.n < 1) throw std::invalid_argument("n must be >= 1");
        if (!(cfg.perturb >= 0.0 && cfg.perturb <= 0.3))
            throw std::invalid_argument("perturb must lie in [0, 0.3]");
        if (!(cfg.ro > 0.0)) throw std::invalid_argument("ro must be positive");
        if (!(cfg.fr > 0.0)) throw std::invalid_argument("fr must be positive");
        if (cfg.f_override && !(*cfg.f_override >= 0.0)) throw std::invalid_argument("f must be nonnegative");
        if (cfg.g_override && !(*cfg.g_override > 0.0)) throw std::invalid_argument("g must be positive");
        if (cfg.dbar_override && !(*cfg.dbar_override > 0.0)) throw std::invalid_argument("dbar must be positive");
        if (!(cfg.dt > 0.0)) throw std::invalid_argument("dt must be positive");
        if (cfg.nsteps < 1) throw std::invalid_argument("nsteps must be >= 1");
        if (!(cfg.tol > 0.0)) throw std::invalid_argument("tol must be positive");
        if (cfg.snapshot_interval < 0) throw std::invalid_argument("snapshot_interval must be >= 0");
    }
};

}  // namespace detail

inline int cmd_mesh_gen(const RunConfig& cfg, const std::string& out_path) {
    const Mesh mesh = generate_square_mesh(cfg.n, cfg.perturb, cfg.mesh_seed);
    const std::string text = write_mesh(mesh);
    if (out_path.empty()) {
        std::cout << text;
    } else {
        detail::write_file(out_path, text);
        std::cout << "wrote " << out_path << " (" << mesh.num_nodes() << " nodes, " << mesh.num_triangles()
                  << " triangles)\n";
    }
    return 0;
}

inline int cmd_run(const RunConfig& cfg) {
    const Mesh mesh = build_mesh(cfg);
    const ElementPair pair = make_element_pair(cfg.pair, mesh);
    const ModelParams params = to_model_params(cfg);
    const MidpointStepper stepper(pair, params, cfg.solver, cfg.tol);
    const auto dir = detail::ensure_output_dir(cfg);

    State s0;
    if (params.f > 0.0) {
        s0 = random_initial_state(pair, params, cfg.seed);
    } else {
        // no balance relation at f = 0: start gravity waves from a random surface
        s0 = State{Eigen::VectorXd::Zero(pair.V.ndof()), random_surface(pair.H, cfg.seed), 0.0};
    }

    std::function<void(int, const State&)> sink;
    if (cfg.snapshot_interval > 0) {
        sink = [&](int step, const State& st) {
            char name[48];
            std::snprintf(name, sizeof name, "fields_%06d.vtk", step);
            std::ofstream out(dir / name);
            write_vtk_fields(out, pair, st, "swfe fields step " + std::to_string(step));
        };
    }

    const RunResult res = run(stepper, s0, params.nsteps, cfg.snapshot_interval, sink);
    detail::write_file(dir / "diagnostics.csv", diagnostics_csv(res.rows));

    const DiagnosticsRow& last = res.rows.back();
    const double e0 = res.rows.front().energy;
    std::cout << "run " << cfg.pair << ": " << params.nsteps << " steps, dt " << params.dt << "\n"
              << "  final eta drift " << detail::sci(last.eta_drift) << ", u drift " << detail::sci(last.u_drift)
              << "\n"
              << "  energy drift " << detail::sci(e0 != 0.0 ? std::abs(last.energy - e0) / std::abs(e0) : 0.0)
              << ", div_inf " << detail::sci(last.div_inf) << "\n"
              << "  diagnostics: " << (dir / "diagnostics.csv").string() << "\n";
    return 0;
}

inline int cmd_balance_test(const RunConfig& cfg, int nseeds) {
    const Mesh mesh = build_mesh(cfg);
    const ElementPair pair = make_element_pair(cfg.pair, mesh);
    const ModelParams params = to_model_params(cfg);
    const MidpointStepper stepper(pair, params, cfg.solver, cfg.tol);
    const bool embedding = pair.embeds_gradient && pair.closed_under_perp;

    double worst_eta = 0.0, worst_u = 0.0;
    std::printf("%-8s %-14s %-14s\n", "seed", "eta_drift", "u_drift");
    for (int k = 0; k < nseeds; ++k) {
        const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(k);
        const State s0 = random_initial_state(pair, params, seed);
        const RunResult res = run(stepper, s0, params.nsteps);
        const DiagnosticsRow& last = res.rows.back();
        worst_eta = std::max(worst_eta, last.eta_drift);
        worst_u = std::max(worst_u, last.u_drift);
        std::printf("%-8llu %-14.3e %-14.3e\n", static_cast<unsigned long long>(seed), last.eta_drift,
                    last.u_drift);
    }
    const double worst = std::max(worst_eta, worst_u);
    bool pass = false;
    if (embedding) {
        pass = worst <= 1e-8;
        std::cout << "balance-test " << cfg.pair << ": max drift " << detail::sci(worst)
                  << (pass ? " <= 1e-8: balanced states stay steady\n" : " > 1e-8: FAILED\n");
    } else {
        pass = worst_eta >= 1e-3;
        std::cout << "balance-test " << cfg.pair << " (negative control): max eta drift " << detail::sci(worst_eta)
                  << (pass ? " >= 1e-3: drift confirmed\n" : " < 1e-3: expected drift not observed\n");
    }
    return pass ? 0 : 1;
}

inline int cmd_infsup(const RunConfig& cfg, const std::vector<int>& ns) {
    if (!cfg.mesh_file.empty())
        throw std::invalid_argument("infsup runs a refinement sweep and requires generated meshes");
    const InfSupReport rep = infsup_sweep(cfg.pair, ns, cfg.perturb, cfg.mesh_seed);
    const auto dir = detail::ensure_output_dir(cfg);

    std::ostringstream csv;
    csv << std::setprecision(17) << "pair,n,h,beta,lambda_min,sqrt_lambda_min\n";
    for (std::size_t i = 0; i < rep.ns.size(); ++i)
        csv << rep.pair_name << "," << rep.ns[i] << "," << rep.h[i] << "," << rep.beta[i] << ","
            << rep.lambda_min[i] << "," << std::sqrt(rep.lambda_min[i]) << "\n";
    detail::write_file(dir / "infsup.csv", csv.str());

    std::printf("%-6s %-12s %-14s %-14s %-14s\n", "n", "h", "beta", "lambda_min", "sqrt(lambda)");
    for (std::size_t i = 0; i < rep.ns.size(); ++i)
        std::printf("%-6d %-12.5f %-14.8e %-14.8e %-14.8e\n", rep.ns[i], rep.h[i], rep.beta[i], rep.lambda_min[i],
                    std::sqrt(rep.lambda_min[i]));

    const Mesh probe = generate_square_mesh(1, 0.0, 0);
    const bool embedding = make_element_pair(cfg.pair, probe).embeds_gradient;
    if (!embedding) {
        std::cout << "infsup " << cfg.pair << ": recorded only (pair lacks the gradient embedding)\n";
        return 0;
    }

    bool bound_ok = true;
    for (std::size_t i = 0; i < rep.ns.size(); ++i)
        bound_ok = bound_ok && rep.beta[i] >= std::sqrt(rep.lambda_min[i]) - 1e-10;
    const auto [bmin, bmax] = std::minmax_element(rep.beta.begin(), rep.beta.end());
    const double ratio = *bmax / *bmin;
    const double pi2 = M_PI * M_PI;
    const double lam_rel = std::abs(rep.lambda_min.back() - pi2) / pi2;

    std::cout << "infsup " << cfg.pair << ": bound beta >= sqrt(lambda_min) - 1e-10 "
              << (bound_ok ? "holds" : "VIOLATED") << ", beta max/min " << detail::sci(ratio)
              << ", lambda_min vs pi^2 " << detail::sci(lam_rel) << "\n";
    const bool pass = bound_ok && ratio <= 1.2 && lam_rel <= 0.05;
    std::cout << (pass ? "infsup: PASS\n" : "infsup: FAIL\n");
    return pass ? 0 : 1;
}

inline int cmd_poisson_check(const RunConfig& cfg) {
    const Mesh mesh = build_mesh(cfg);
    const ElementPair pair = make_element_pair(cfg.pair, mesh);
    const double disc = poisson_sparsity_check(pair);
    const double kmax = stiffness(pair).max_abs();
    const double rel = disc / kmax;
    std::cout << "poisson-check " << cfg.pair << ": ||G'Mu^-1 G - K||_max = " << detail::sci(disc)
              << " (relative " << detail::sci(rel) << ")\n";
    bool pass = false;
    if (pair.embeds_gradient) {
        pass = rel <= 1e-10;
        std::cout << (pass ? "poisson-check: identity holds (<= 1e-10 relative)\n"
                           : "poisson-check: FAILED, identity violated\n");
    } else {
        pass = rel >= 1e-2;
        std::cout << (pass ? "poisson-check (negative control): identity violated as expected (>= 1e-2)\n"
                           : "poisson-check: FAILED, expected violation not observed\n");
    }
    return pass ? 0 : 1;
}

inline int cmd_spectrum(const RunConfig& cfg) {
    const Mesh mesh = build_mesh(cfg);
    const ElementPair pair = make_element_pair(cfg.pair, mesh);
    const ModelParams params = to_model_params(cfg);
    const SpectrumReport rep = compute_spectrum(pair, params, 5, cfg.seed);
    const auto dir = detail::ensure_output_dir(cfg);

    std::ostringstream csv;
    csv << std::setprecision(17) << "omega\n";
    for (int i = 0; i < rep.omega.size(); ++i) csv << rep.omega[i] << "\n";
    detail::write_file(dir / "spectrum.csv", csv.str());

    std::cout << "spectrum " << cfg.pair << ": " << rep.omega.size() << " modes, max |omega| "
              << detail::sci(rep.max_omega) << "\n"
              << "  max |Re| " << detail::sci(rep.max_real) << ", zero modes " << rep.zero_modes
              << " (interior H DOFs " << rep.interior_h_dofs << ")\n"
              << "  max balanced-state residual " << detail::sci(rep.max_balanced_residual) << "\n";

    bool pass = rep.max_real <= 1e-10 * rep.max_omega;
    if (pair.embeds_gradient)
        pass = pass && rep.max_balanced_residual <= 1e-11 && rep.zero_modes >= rep.interior_h_dofs;
    std::cout << (pass ? "spectrum: PASS\n" : "spectrum: FAIL\n");
    return pass ? 0 : 1;
}

inline int cmd_converge(const RunConfig& cfg, const std::vector<int>& ns) {
    if (!cfg.mesh_file.empty())
        throw std::invalid_argument("converge runs a refinement sweep and requires generated meshes");
    const ModelParams base = to_model_params(cfg);
    const ConvergenceReport rep = convergence_study(cfg.pair, ns, cfg.perturb, cfg.mesh_seed, base.g, base.dbar);
    const auto dir = detail::ensure_output_dir(cfg);

    std::ostringstream csv;
    csv << std::setprecision(17) << "pair,n,h,err_u,err_eta\n";
    for (std::size_t i = 0; i < rep.ns.size(); ++i)
        csv << rep.pair_name << "," << rep.ns[i] << "," << rep.h[i] << "," << rep.err_u[i] << ","
            << rep.err_eta[i] << "\n";
    detail::write_file(dir / "converge.csv", csv.str());

    std::printf("%-6s %-12s %-14s %-14s\n", "n", "h", "err_u", "err_eta");
    for (std::size_t i = 0; i < rep.ns.size(); ++i)
        std::printf("%-6d %-12.5f %-14.6e %-14.6e\n", rep.ns[i], rep.h[i], rep.err_u[i], rep.err_eta[i]);

    const Mesh probe = generate_square_mesh(1, 0.0, 0);
    const int k = make_element_pair(cfg.pair, probe).V.scalar().degree();
    const double threshold = k == 0 ? 0.8 : (k == 1 ? 1.8 : 2.7);
    const bool pass = rep.order_eta >= threshold;
    std::cout << "converge " << cfg.pair << " (f=0 standing wave): observed order eta " << detail::sci(rep.order_eta)
              << ", u " << detail::sci(rep.order_u) << "; threshold " << threshold << " -> "
              << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 1;
}

inline int cmd_export_ops(const RunConfig& cfg) {
    const Mesh mesh = build_mesh(cfg);
    const ElementPair pair = make_element_pair(cfg.pair, mesh);
    const auto dir = detail::ensure_output_dir(cfg);
    const std::pair<const char*, SparseOperator> ops[] = {{"Mu.mtx", velocity_mass(pair)},
                                                          {"Meta.mtx", pressure_mass(pair)},
                                                          {"G.mtx", gradient_op(pair)},
                                                          {"C.mtx", coriolis_op(pair)},
                                                          {"K.mtx", stiffness(pair)}};
    for (const auto& [name, op] : ops) {
        detail::write_file(dir / name, to_matrix_market(op));
        std::cout << "wrote " << (dir / name).string() << " (" << op.rows() << "x" << op.cols() << ", "
                  << op.nonzeros() << " nonzeros)\n";
    }
    return 0;
}

/// Entry point: args in natural order, without the program name.
/// Exit codes: 0 success / all verification thresholds met, 1 a verification
/// threshold failed or a runtime error, 2 usage or configuration errors.
inline int dispatch(std::vector<std::string> args) {
    CLI::App app{"mixed finite element pairs for the linear rotating shallow-water equations"};
    app.name("swfe");
    app.require_subcommand(1);
    int rc = 0;

    detail::ConfigCli mesh_gen_cfg, run_cfg, bal_cfg, infsup_cfg, poisson_cfg, spectrum_cfg, conv_cfg, export_cfg;
    std::string mesh_out;
    int nseeds = 20;
    std::string infsup_ns = "4,8,16", conv_ns = "4,8,16";

    auto* sc_mesh = app.add_subcommand("mesh-gen", "generate a perturbed unit-square mesh and write it");
    mesh_gen_cfg.attach(sc_mesh);
    sc_mesh->add_option("--out", mesh_out, "output mesh file (default: stdout)");
    sc_mesh->callback([&] { rc = cmd_mesh_gen(mesh_gen_cfg.resolve(), mesh_out); });

    auto* sc_run = app.add_subcommand("run", "time integration with per-step diagnostics");
    run_cfg.attach(sc_run);
    sc_run->callback([&] { rc = cmd_run(run_cfg.resolve()); });

    auto* sc_bal = app.add_subcommand("balance-test", "seeded steady-balance replications, prints drift per seed");
    bal_cfg.attach(sc_bal);
    sc_bal->add_option("--seeds", nseeds, "number of seeded replications")->check(CLI::PositiveNumber);
    sc_bal->callback([&] { rc = cmd_balance_test(bal_cfg.resolve(), nseeds); });

    auto* sc_infsup = app.add_subcommand("infsup", "inf-sup constants over a mesh refinement sweep");
    infsup_cfg.attach(sc_infsup);
    sc_infsup->add_option("--ns", infsup_ns, "comma-separated mesh sizes (default 4,8,16)");
    sc_infsup->callback([&] { rc = cmd_infsup(infsup_cfg.resolve(), detail::parse_int_list(infsup_ns)); });

    auto* sc_poisson = app.add_subcommand("poisson-check", "pressure-Poisson sparsity identity check");
    poisson_cfg.attach(sc_poisson);
    sc_poisson->callback([&] { rc = cmd_poisson_check(poisson_cfg.resolve()); });

    auto* sc_spec = app.add_subcommand("spectrum", "dense spectrum of the semi-discrete operator");
    spectrum_cfg.attach(sc_spec);
    sc_spec->callback([&] { rc = cmd_spectrum(spectrum_cfg.resolve()); });

    auto* sc_conv = app.add_subcommand("converge", "standing-wave convergence study (f = 0)");
    conv_cfg.attach(sc_conv);
    sc_conv->add_option("--ns", conv_ns, "comma-separated mesh sizes (default 4,8,16)");
    sc_conv->callback([&] { rc = cmd_converge(conv_cfg.resolve(), detail::parse_int_list(conv_ns)); });

    auto* sc_export = app.add_subcommand("export-ops", "dump assembled operators in Matrix Market format");
    export_cfg.attach(sc_export);
    sc_export->callback([&] { rc = cmd_export_ops(export_cfg.resolve()); });

    std::reverse(args.begin(), args.end());
    try {
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}

inline int dispatch(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return dispatch(std::move(args));
}

}  // namespace swfe::cli
