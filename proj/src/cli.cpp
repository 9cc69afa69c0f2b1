#include "ksopt/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

#include "ksopt/config.hpp"
#include "ksopt/csv.hpp"
#include "ksopt/snapshot.hpp"
#include "ksopt/verify.hpp"

namespace ksopt {

void write_csv(std::ostream& out, const OptimizeReport& report)
{
    out << "iter,j_total,j_u,j_v,j_f,vi_residual,step,backtracks\n";
    for (const auto& r : report.iterates) {
        out << r.iteration << ',' << format_real(r.cost.j_total) << ',' << format_real(r.cost.j_u) << ','
            << format_real(r.cost.j_v) << ',' << format_real(r.cost.j_f) << ',' << format_real(r.vi_residual) << ','
            << format_real(r.step) << ',' << r.backtracks << '\n';
    }
}

namespace {

// Relative-error threshold of the gradient check.
constexpr double gradcheck_tolerance = 2e-2;

struct Options {
    std::string config;
    std::string output;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string trajectory;
    std::string study = "both";
};

/// Failures in reading user-supplied inputs; mapped to exit_usage.
struct InputError : Error {
    using Error::Error;
};

std::filesystem::path output_dir(const RunConfig& cfg, const Options& opt)
{
    std::filesystem::path dir = opt.output.empty() ? cfg.output_directory : std::filesystem::path(opt.output);
    if (opt.output.empty() && dir.is_relative()) dir = cfg.base_directory / dir;
    std::filesystem::create_directories(dir);
    return dir;
}

template <class T>
void write_file(const std::filesystem::path& path, const T& table)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    write_csv(out, table);
}

void write_state(const StateTrajectory& state, const std::filesystem::path& dir, int every)
{
    std::filesystem::create_directories(dir);
    const int nt = state.time_grid.steps;
    for (int n = 0; n <= nt; ++n) {
        if (n % every != 0 && n != nt) continue;
        write_snapshot(state.u[n], state.time_grid.time(n), level_path(dir, "u", n));
        write_snapshot(state.v[n], state.time_grid.time(n), level_path(dir, "v", n));
    }
}

int report_invariants(const InvariantReport& rep, std::ostream& out, std::ostream& err)
{
    for (const auto& c : rep.checks) {
        out << "invariant " << c.name << (c.hard ? " [hard]" : " [report]") << ": " << (c.pass ? "pass" : "FAIL")
            << " (worst " << format_real(c.worst) << ", tolerance " << format_real(c.tolerance) << ")\n";
    }
    if (!rep.hard_checks_pass()) {
        err << "error: a hard invariant failed\n";
        return exit_verification;
    }
    return exit_ok;
}

int cmd_simulate(const Options& opt, std::ostream& out, std::ostream& err, bool snapshots)
{
    const RunConfig cfg = load_config(opt.config);
    const Problem problem = build_problem(cfg);
    const ControlField f = initial_control(cfg, problem);
    const StateTrajectory state = solve_forward(problem.u0, problem.v0, f, problem.params, problem.forward);
    const auto dir = output_dir(cfg, opt);
    if (snapshots) {
        write_state(state, dir / "state", cfg.snapshot_every);
        write_control(f, dir / "control");
    }
    const InvariantReport rep = monitor_invariants(state, problem.params, {}, &f);
    write_file(dir / "invariants.csv", rep);
    const auto& last = rep.records.back();
    out << "final time " << format_real(last.time) << ": mass_u " << format_real(last.mass_u) << ", min_u "
        << format_real(last.min_u) << ", min_v " << format_real(last.min_v) << '\n';
    out << "logistic mass limit r|Omega|/mu = "
        << format_real(problem.params.r * problem.u0.grid().area() / problem.params.mu) << '\n';
    return report_invariants(rep, out, err);
}

int cmd_adjoint(const Options& opt, std::ostream& out, std::ostream&)
{
    const RunConfig cfg = load_config(opt.config);
    const Problem problem = build_problem(cfg);
    const ControlField f = initial_control(cfg, problem);
    const auto dir = output_dir(cfg, opt);
    const std::filesystem::path traj = opt.trajectory.empty() ? dir / "state" : std::filesystem::path(opt.trajectory);

    StateTrajectory state;
    state.time_grid = problem.time_grid;
    state.scheme = problem.forward.scheme;
    const GridSpec grid = problem.u0.grid();
    for (int n = 0; n <= problem.time_grid.steps; ++n) {
        const auto pu = level_path(traj, "u", n);
        const auto pv = level_path(traj, "v", n);
        if (!std::filesystem::exists(pu) || !std::filesystem::exists(pv)) {
            throw InputError("stored trajectory incomplete: missing level " + std::to_string(n) + " in " +
                             traj.string() + " (run simulate with output.snapshot_every = 1 first)");
        }
        state.u.push_back(read_snapshot(pu, grid));
        state.v.push_back(read_snapshot(pv, grid));
    }

    const AdjointTrajectory adj =
        solve_adjoint(state, f, problem.targets, problem.params, problem.weights, problem.adjoint);
    const auto adir = dir / "adjoint";
    std::filesystem::create_directories(adir);
    // Multiplier n pairs with state level n + 1; stamped with that time.
    for (int n = 0; n < problem.time_grid.steps; ++n) {
        write_snapshot(adj.lambda[n], problem.time_grid.time(n + 1), level_path(adir, "lambda", n));
        write_snapshot(adj.eta[n], problem.time_grid.time(n + 1), level_path(adir, "eta", n));
    }
    const GradientField d =
        reduced_gradient(f, state, adj, problem.weights.gamma_f, problem.params.p_exponent);
    out << "adjoint: " << problem.time_grid.steps << " levels written to " << adir.string() << ", |grad|_L2 = "
        << format_real(d.l2_norm()) << '\n';
    return exit_ok;
}

int cmd_optimize(const Options& opt, std::ostream& out, std::ostream&)
{
    const RunConfig cfg = load_config(opt.config);
    const Problem problem = build_problem(cfg);
    const ControlField f0 = initial_control(cfg, problem);

    std::vector<ControlField> starts{f0};
    if (cfg.starts > 1) {
        // Extra starts: f0 plus Gaussian noise with unit RMS per degree of freedom.
        const double scale = std::sqrt(problem.region.area() * problem.time_grid.final_time);
        for (auto& dir : random_directions(f0, cfg.starts - 1, opt.seed)) {
            ControlField s = f0;
            s.axpy(scale, dir);
            starts.push_back(project(s, problem.set));
        }
    }
    const OptimizeReport rep = solve_multistart(problem, starts, cfg.optimizer);

    const auto dir = output_dir(cfg, opt);
    write_file(dir / "report.csv", rep);
    write_control(rep.control, dir / "control");

    const Evaluation final_eval = evaluate(problem, rep.control);
    write_state(final_eval.state, dir / "state", cfg.snapshot_every);

    const auto& first = rep.iterates.front();
    const auto& last = rep.iterates.back();
    out << "optimize: " << to_string(rep.reason) << " after " << last.iteration << " iterations, J "
        << format_real(first.cost.j_total) << " -> " << format_real(last.cost.j_total) << ", vi_residual "
        << format_real(last.vi_residual) << '\n';
    return exit_ok;
}

int cmd_grad_check(const Options& opt, std::ostream& out, std::ostream& err)
{
    const RunConfig cfg = load_config(opt.config);
    const Problem problem = build_problem(cfg);
    const ControlField f = initial_control(cfg, problem);
    const auto dirs = random_directions(f, cfg.gradcheck_directions, opt.seed);
    const auto rows = gradient_check(problem, f, dirs, cfg.gradcheck_eps, opt.threads);
    write_file(output_dir(cfg, opt) / "gradcheck.csv", rows);

    double worst = 0.0;
    for (const auto& r : rows) {
        out << "direction " << r.direction << ": adjoint " << format_real(r.adjoint) << ", fd "
            << format_real(r.finite_difference) << ", relative error " << format_real(r.relative_error) << '\n';
        worst = std::max(worst, r.relative_error);
    }
    if (!(worst <= gradcheck_tolerance)) {
        err << "error: gradient check failed, worst relative error " << format_real(worst) << " > "
            << format_real(gradcheck_tolerance) << '\n';
        return exit_verification;
    }
    return exit_ok;
}

int cmd_invariants(const Options& opt, std::ostream& out, std::ostream& err)
{
    return cmd_simulate(opt, out, err, false);
}

int cmd_mms(const Options& opt, std::ostream& out, std::ostream& err)
{
    const RunConfig cfg = load_config(opt.config);
    if (opt.study != "spatial" && opt.study != "temporal" && opt.study != "both") {
        throw InputError("--study must be spatial, temporal or both");
    }
    MmsOptions mo;
    mo.scheme = cfg.forward.scheme;
    mo.kappa = cfg.model.kappa;
    mo.r = cfg.model.r;
    mo.mu = cfg.model.mu;
    mo.final_time = cfg.final_time;
    const auto dir = output_dir(cfg, opt);

    bool ok = true;
    auto study = [&](MmsStudy which, const char* name, double expected) {
        mo.study = which;
        const ConvergenceTable table = mms_convergence(cfg.mms_levels, mo);
        write_file(dir / (std::string("convergence_") + name + ".csv"), table);
        const auto& last = table.rows.back();
        out << name << " order: u " << format_real(last.order_u) << ", v " << format_real(last.order_v)
            << " (expected " << expected << ")\n";
        if (mo.scheme == FluxScheme::central &&
            (std::abs(last.order_u - expected) > 0.2 || std::abs(last.order_v - expected) > 0.2)) {
            err << "error: " << name << " order outside " << expected << " +/- 0.2\n";
            ok = false;
        }
    };
    if (opt.study != "temporal") study(MmsStudy::spatial, "spatial", 2.0);
    if (opt.study != "spatial") study(MmsStudy::temporal, "temporal", 1.0);
    return ok ? exit_ok : exit_verification;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Bilinear optimal control of a Keller-Segel system with logistic source", "ksopt"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "run configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--output", opt.output, "output directory (overrides output.directory)");
        sub->add_option("--seed", opt.seed, "seed for random directions and extra starts");
        sub->add_option("--threads", opt.threads, "worker threads for finite differences")
            ->check(CLI::PositiveNumber);
        return sub;
    };
    auto* simulate = add_common(app.add_subcommand("simulate", "forward solve, snapshots and invariant CSV"));
    auto* adjoint = add_common(app.add_subcommand("adjoint", "adjoint solve from a stored trajectory"));
    adjoint->add_option("--trajectory", opt.trajectory, "directory with u_/v_ snapshots (default <output>/state)");
    auto* optimize = add_common(app.add_subcommand("optimize", "projected-gradient optimization"));
    auto* grad_check = add_common(app.add_subcommand("grad-check", "reduced gradient vs finite differences"));
    auto* invariants = add_common(app.add_subcommand("invariants", "forward solve with invariant monitors only"));
    auto* mms = add_common(app.add_subcommand("mms", "manufactured-solution convergence tables"));
    mms->add_option("--study", opt.study, "spatial, temporal or both");

    if (argc > 1 && argv[1][0] != '-' && !app.get_subcommand_no_throw(argv[1])) {
        err << "error: unknown subcommand '" << argv[1] << "'\n\n" << app.help();
        return exit_usage;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return exit_usage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(opt, out, err, true);
        if (adjoint->parsed()) return cmd_adjoint(opt, out, err);
        if (optimize->parsed()) return cmd_optimize(opt, out, err);
        if (grad_check->parsed()) return cmd_grad_check(opt, out, err);
        if (invariants->parsed()) return cmd_invariants(opt, out, err);
        if (mms->parsed()) return cmd_mms(opt, out, err);
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << '\n';
        return exit_solver;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return exit_usage;
    } catch (const SnapshotError& e) {
        err << "snapshot error: " << e.what() << '\n';
        return exit_usage;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_solver;
    }
    err << app.help();
    return exit_usage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    std::vector<const char*> argv{"ksopt"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace ksopt
