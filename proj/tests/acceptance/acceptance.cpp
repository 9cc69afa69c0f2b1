// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "ksopt/cli.hpp"
#include "ksopt/config.hpp"
#include "ksopt/verify.hpp"

using namespace ksopt;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

const fs::path fixture_dir = KSOPT_FIXTURE_DIR;

std::string read_text(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Fixture text with later keys overriding earlier ones.
RunConfig fixture_config(const std::string& name, const std::string& overrides = "")
{
    return parse_config(read_text(fixture_dir / name) + "\n" + overrides, fixture_dir);
}

struct Criterion {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* pattern, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, a);
    return buf;
}

std::string sci(double x) { return fmt("%.3e", x); }

// Smooth random directions: a few separable cosine modes with normal
// amplitudes, normalized in L2(Q_c). The same seed gives the same continuous
// direction on every grid.
std::vector<ControlField> smooth_directions(const Problem& p, int count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> amp;
    std::uniform_int_distribution<int> mode(0, 3);
    std::vector<ControlField> out;
    for (int k = 0; k < count; ++k) {
        struct Mode {
            double a;
            int kx, ky, kt;
        };
        std::vector<Mode> modes;
        for (int m = 0; m < 4; ++m) {
            const double a = amp(rng);
            const int kx = mode(rng);
            const int ky = mode(rng);
            const int kt = mode(rng);
            modes.push_back({a, kx, ky, kt});
        }
        const double T = p.time_grid.final_time;
        ControlField d = ControlField::from_function(p.time_grid, p.region, [&](double t, double x, double y) {
            double s = 0.0;
            for (const auto& md : modes) {
                s += md.a * std::cos(md.kx * pi * x) * std::cos(md.ky * pi * y) * std::cos(md.kt * pi * t / T);
            }
            return s;
        });
        d *= 1.0 / d.l2_norm();
        out.push_back(std::move(d));
    }
    return out;
}

ControlField half_target_control(const RunConfig& cfg, const Problem& p)
{
    ControlField f = control_from_expr(cfg.f_star, p, cfg.base_directory);
    f *= 0.5;
    return f;
}

// Nonnegative data, nonnegative control, upwind fluxes, both signs of kappa.
std::vector<std::pair<StateTrajectory, ModelParams>> positivity_runs()
{
    std::vector<std::pair<StateTrajectory, ModelParams>> runs;
    for (double kappa : {1.0, -1.0}) {
        const RunConfig cfg = fixture_config("manufactured.cfg", "forward.scheme = upwind\nmodel.kappa = " +
                                                                      std::to_string(kappa) + "\n");
        const Problem p = build_problem(cfg);
        const ControlField f = control_from_expr(cfg.f_star, p, cfg.base_directory);
        runs.emplace_back(solve_forward(p.u0, p.v0, f, p.params, p.forward), p.params);
    }
    return runs;
}

Criterion a1()
{
    double worst = 0.0;
    for (const auto& [s, params] : positivity_runs()) {
        for (std::size_t n = 0; n < s.u.size(); ++n) {
            worst = std::min({worst, s.u[n].min(), s.v[n].min()});
        }
    }
    return {worst >= -1e-12, "min(u, v) over levels, kappa = +1 and -1: " + sci(worst) + " (>= -1e-12)"};
}

Criterion a2()
{
    bool pass = true;
    double worst_bound = -1e300;
    double worst_identity = 0.0;
    for (const auto& [s, params] : positivity_runs()) {
        const InvariantReport rep = monitor_invariants(s, params);
        const InvariantCheck& bound = rep.check("mass_bound");
        const InvariantCheck& identity = rep.check("mass_identity");
        pass = pass && bound.hard && bound.pass && identity.pass;
        worst_bound = std::max(worst_bound, bound.worst);
        worst_identity = std::max(worst_identity, identity.worst);
    }
    return {pass, "max(mass - bound) " + sci(worst_bound) + " (<= 0), mass identity residual " +
                      sci(worst_identity) + " (<= 1e-12)"};
}

Criterion a3()
{
    const LogisticRun coarse = run_logistic(0.1, 1.0, 2.0, 20.0, 2000);
    const LogisticRun fine = run_logistic(0.1, 1.0, 2.0, 20.0, 4000);
    const double final_error = std::abs(coarse.values.back() - 0.5);
    auto sup_error = [](const LogisticRun& run) {
        double e = 0.0;
        for (std::size_t n = 0; n < run.times.size(); ++n) {
            e = std::max(e, std::abs(run.values[n] - logistic_closed_form(0.1, 1.0, 2.0, run.times[n])));
        }
        return e;
    };
    const double order = std::log2(sup_error(coarse) / sup_error(fine));
    const bool pass = final_error <= 1e-3 && std::abs(order - 1.0) <= 0.2;
    return {pass, "|u(T) - 0.5| " + sci(final_error) + " (<= 1e-3), order under tau halving " + fmt("%.3f", order) +
                      " (1 +/- 0.2)"};
}

Criterion a4()
{
    const double observed = observed_heat_decay_rate(GridSpec(1.0, 1.0, 64, 64), 1, 0.1, 1000);
    const double expected = 1.0 + pi * pi;
    const double rel = std::abs(observed - expected) / expected;
    return {rel <= 0.01, "decay rate " + fmt("%.6f", observed) + " vs " + fmt("%.6f", expected) + ", relative " +
                             sci(rel) + " (<= 1e-2)"};
}

Criterion a5()
{
    MmsOptions spatial;
    spatial.study = MmsStudy::spatial;
    MmsOptions temporal;
    temporal.study = MmsStudy::temporal;
    const ConvergenceTable ts = mms_convergence(4, spatial);
    const ConvergenceTable tt = mms_convergence(4, temporal);
    bool pass = true;
    std::string detail = "spatial orders (u, v):";
    for (std::size_t k = 1; k < ts.rows.size(); ++k) {
        detail += " " + fmt("%.3f", ts.rows[k].order_u) + "/" + fmt("%.3f", ts.rows[k].order_v);
    }
    detail += "; temporal:";
    for (std::size_t k = 1; k < tt.rows.size(); ++k) {
        detail += " " + fmt("%.3f", tt.rows[k].order_u) + "/" + fmt("%.3f", tt.rows[k].order_v);
    }
    const auto& s = ts.rows.back();
    const auto& t = tt.rows.back();
    pass = std::abs(s.order_u - 2.0) <= 0.2 && std::abs(s.order_v - 2.0) <= 0.2 && std::abs(t.order_u - 1.0) <= 0.2 &&
           std::abs(t.order_v - 1.0) <= 0.2;
    return {pass, detail + " (finest pair: 2 +/- 0.2 and 1 +/- 0.2)"};
}

std::vector<double> gradient_errors(const std::string& overrides, int directions)
{
    const RunConfig cfg = fixture_config("manufactured.cfg", overrides);
    const Problem p = build_problem(cfg);
    const ControlField f = half_target_control(cfg, p);
    std::vector<double> errors;
    for (const auto& row : gradient_check(p, f, smooth_directions(p, directions, 2024), cfg.gradcheck_eps)) {
        errors.push_back(row.relative_error);
    }
    return errors;
}

Criterion g1()
{
    const std::vector<double> coarse = gradient_errors("", 5);
    const std::vector<double> fine = gradient_errors("grid.nx = 64\ngrid.ny = 64\ntime.nt = 200\n", 5);
    const double floor = 1e-9;
    bool within = true;
    bool monotone = true;
    std::string detail = "relative errors 32^2x100 / 64^2x200:";
    for (std::size_t k = 0; k < coarse.size(); ++k) {
        within = within && coarse[k] <= 2e-2;
        monotone = monotone && fine[k] <= coarse[k] + floor;
        detail += " " + sci(coarse[k]) + "/" + sci(fine[k]);
    }

    const RunConfig cfg = fixture_config("manufactured.cfg", "grid.nx = 8\ngrid.ny = 8\ntime.nt = 20\n");
    const Problem p = build_problem(cfg);
    const ControlField f = half_target_control(cfg, p);
    const GradientField analytic = evaluate_gradient(p, f).gradient;
    const GradientField fd = fd_gradient_field(p, f, cfg.gradcheck_eps);
    const double cosine = cosine_similarity(analytic, fd);

    detail += "; cosine 8^2x20 " + fmt("%.12f", cosine) + " (>= 0.999)";
    detail += within ? "" : "; error above 2e-2";
    detail += monotone ? "" : "; not decreasing under refinement";
    return {within && monotone && cosine >= 0.999, detail};
}

bool strictly_decreasing(const OptimizeReport& r)
{
    for (std::size_t k = 1; k < r.iterates.size(); ++k) {
        if (!(r.iterates[k].cost.j_total < r.iterates[k - 1].cost.j_total)) return false;
    }
    return true;
}

Criterion o1()
{
    const RunConfig cfg = fixture_config("manufactured.cfg");
    const Problem p = build_problem(cfg);
    const OptimizeReport r = solve(p, p.zero_control(), cfg.optimizer);
    const double j0 = r.iterates.front().cost.j_total;
    const double j1 = r.iterates.back().cost.j_total;
    const double vi = r.iterates.back().vi_residual;
    const bool decreasing = strictly_decreasing(r);
    const bool pass = decreasing && j1 <= j0 / 10.0 && vi <= 1e-5;
    return {pass, std::to_string(r.iterates.size() - 1) + " iterations, strictly decreasing " +
                      (decreasing ? "yes" : "no") + ", J " + sci(j0) + " -> " + sci(j1) + " (ratio " +
                      fmt("%.1f", j0 / j1) + " >= 10), vi_residual " + sci(vi) + " (<= 1e-5)"};
}

Criterion o2()
{
    const RunConfig cfg = fixture_config("manufactured.cfg", "control.kind = unconstrained\n");
    const Problem p = build_problem(cfg);
    const OptimizeReport r = solve(p, p.zero_control(), cfg.optimizer);
    const GradientEvaluation ge = evaluate_gradient(p, r.control);
    const KktReport k = kkt_report(r.control, ge.evaluation.state, ge.adjoint, p.set, p.weights,
                                   p.params.p_exponent, cfg.optimizer.armijo.s0);
    const bool pass = r.converged && k.pointwise_max_violation <= 1e-4;
    return {pass, std::string("converged ") + (r.converged ? "yes" : "no") + " after " +
                      std::to_string(r.iterates.size() - 1) + " iterations, max |gamma_f sgn(f)|f|^(p-1) + v eta| " +
                      sci(k.pointwise_max_violation) + " (<= 1e-4)"};
}

Criterion u1()
{
    const RunConfig cfg = fixture_config("manufactured.cfg");
    const Problem p = build_problem(cfg);
    const ControlField f = control_from_expr(cfg.f_star, p, cfg.base_directory);
    const ControlField g = random_directions(f, 1, 7).front();
    const PerturbationStudy st = perturbation_study(p.u0, p.v0, f, g, p.params, p.forward, {1e-2, 1e-3, 1e-4});
    return {std::abs(st.slope - 1.0) <= 0.2, "log-log slope " + fmt("%.4f", st.slope) + " (1 +/- 0.2)"};
}

Criterion d1()
{
    const RunConfig cfg = fixture_config("manufactured.cfg");
    const Problem p = build_problem(cfg);
    const ControlField f = half_target_control(cfg, p);
    const StateTrajectory s = solve_forward(p.u0, p.v0, f, p.params, p.forward);
    const AdjointTrajectory a = solve_adjoint(s, f, p.targets, p.params, p.weights, p.adjoint);
    const AdjointTrajectory b = solve_adjoint(s, f, p.targets, p.params, p.weights, p.adjoint);
    bool bitwise = true;
    for (std::size_t n = 0; n < a.lambda.size(); ++n) {
        bitwise = bitwise && a.lambda[n] == b.lambda[n] && a.eta[n] == b.eta[n];
    }

    CostWeights scaled = p.weights;
    scaled.gamma_u *= 3.0;
    scaled.gamma_v *= 3.0;
    const AdjointTrajectory c = solve_adjoint(s, f, p.targets, p.params, scaled, p.adjoint);
    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t n = 0; n < a.lambda.size(); ++n) {
        diff = std::max({diff, norms(c.lambda[n] - 3.0 * a.lambda[n]).linf, norms(c.eta[n] - 3.0 * a.eta[n]).linf});
        scale = std::max({scale, norms(c.lambda[n]).linf, norms(c.eta[n]).linf});
    }
    const double rel = diff / scale;
    return {bitwise && rel <= 1e-13, std::string("repeat bitwise ") + (bitwise ? "yes" : "no") +
                                         ", linearity in (gamma_u, gamma_v) relative " + sci(rel) + " (<= 1e-13)"};
}

bool same_tree(const fs::path& a, const fs::path& b, std::size_t& files)
{
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file()) continue;
        const fs::path other = b / fs::relative(entry.path(), a);
        if (!fs::exists(other) || read_text(entry.path()) != read_text(other)) return false;
        ++files;
    }
    std::size_t count_b = 0;
    for (const auto& entry : fs::recursive_directory_iterator(b)) count_b += entry.is_regular_file();
    return count_b == files;
}

Criterion r1()
{
    const fs::path dir = fs::temp_directory_path() / "ksopt_acceptance_r1";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path cfg = dir / "run.cfg";
    std::ofstream(cfg) << read_text(fixture_dir / "manufactured.cfg")
                       << "\ngrid.nx = 16\ngrid.ny = 16\ntime.nt = 20\noptimizer.starts = 3\n";
    std::ostringstream sink;
    int codes = 0;
    for (const char* run : {"a", "b"}) {
        codes += ksopt::run({"optimize", "--config", cfg.string(), "--seed", "17", "--threads", "1", "--output",
                             (dir / run).string()},
                            sink, sink);
    }
    std::size_t files = 0;
    const bool same = codes == 0 && same_tree(dir / "a", dir / "b", files);
    return {same && files > 0, "two runs (16^2x20, 3 starts, seed 17): " + std::to_string(files) +
                                   " output files, identical " + (same ? "yes" : "no")};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Criterion()>>> criteria{
        {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5}, {"G1", g1},
        {"O1", o1}, {"O2", o2}, {"U1", u1}, {"D1", d1}, {"R1", r1},
    };
    int failures = 0;
    for (const auto& [id, check] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Criterion c;
        try {
            c = check();
        } catch (const std::exception& e) {
            c = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (c.pass ? "PASS " : "FAIL ") << id << "  " << c.detail << "  [" << fmt("%.1f", secs) << " s]"
                  << std::endl;
        failures += c.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
