#include "ksopt/verify.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include "ksopt/csv.hpp"

namespace ksopt {

namespace {

constexpr double pi = std::numbers::pi;

std::string fmt(double x) { return format_real(x); }

} // namespace

// ---------------------------------------------------------------------------
// Invariant monitors
// ---------------------------------------------------------------------------

bool InvariantReport::hard_checks_pass() const
{
    return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return !c.hard || c.pass; });
}

const InvariantCheck& InvariantReport::check(const std::string& name) const
{
    for (const auto& c : checks) {
        if (c.name == name) return c;
    }
    throw PreconditionError("no invariant check named " + name);
}

InvariantReport monitor_invariants(const StateTrajectory& state, const ModelParams& params,
                                   const InvariantTolerances& tolerances, const ControlField* control)
{
    const TimeGrid& tg = state.time_grid;
    const double tau = tg.tau();
    const double area = state.grid().area();
    const double mass0 = integrate(state.u.front());
    const double capacity = params.r * area / params.mu;
    const double bound = std::max(mass0, capacity) * (1.0 + tolerances.mass_bound_slack * tau);

    InvariantReport report;
    double worst_negative = 0.0;
    double worst_identity = 0.0;
    double worst_bound = -HUGE_VAL;
    for (int n = 0; n <= tg.steps; ++n) {
        InvariantRecord rec;
        rec.level = n;
        rec.time = tg.time(n);
        rec.min_u = state.u[n].min();
        rec.min_v = state.v[n].min();
        rec.mass_u = integrate(state.u[n]);
        rec.mass_bound_rhs = bound;
        rec.l2_u = norms(state.u[n]).l2;
        rec.h1_v_proxy = norms(state.v[n]).h1_seminorm;
        rec.h2_v_proxy = norms(laplacian_neumann(state.v[n])).l2;
        if (n > 0) {
            const StepRecord& step = state.steps[n - 1];
            const double prev = integrate(state.u[n - 1]);
            const double defect = (rec.mass_u - prev) / tau - params.r * step.lagged_mass + params.mu * step.lagged_damping;
            rec.mass_identity_residual = std::abs(defect) / std::max({1.0, std::abs(rec.mass_u), std::abs(prev)});
            rec.picard_iters = step.picard_iters;
        }
        worst_negative = std::min({worst_negative, rec.min_u, rec.min_v});
        worst_identity = std::max(worst_identity, rec.mass_identity_residual);
        worst_bound = std::max(worst_bound, rec.mass_u - bound);
        report.records.push_back(rec);
    }

    bool control_nonnegative = true;
    if (control) {
        for (double x : control->values()) control_nonnegative = control_nonnegative && x >= 0.0;
    }
    const bool nonneg_guaranteed = state.scheme == FluxScheme::upwind && control_nonnegative;
    const bool nonneg_pass = worst_negative >= -tolerances.nonnegativity;

    report.checks.push_back({"nonnegativity", nonneg_guaranteed, nonneg_pass, worst_negative, -tolerances.nonnegativity});
    report.checks.push_back({"mass_identity", true, worst_identity <= tolerances.mass_identity, worst_identity,
                             tolerances.mass_identity});
    // The bound argument needs u >= 0; on a trajectory with negative values it is only reported.
    report.checks.push_back({"mass_bound", nonneg_pass, worst_bound <= 0.0, worst_bound, 0.0});
    return report;
}

void write_csv(std::ostream& out, const InvariantReport& report)
{
    out << "level,time,min_u,min_v,mass_u,mass_bound_rhs,mass_identity_residual,l2_u,h1_v,h2_v,picard_iters\n";
    for (const auto& r : report.records) {
        out << r.level << ',' << fmt(r.time) << ',' << fmt(r.min_u) << ',' << fmt(r.min_v) << ',' << fmt(r.mass_u)
            << ',' << fmt(r.mass_bound_rhs) << ',' << fmt(r.mass_identity_residual) << ',' << fmt(r.l2_u) << ','
            << fmt(r.h1_v_proxy) << ',' << fmt(r.h2_v_proxy) << ',' << r.picard_iters << '\n';
    }
}

// ---------------------------------------------------------------------------
// Finite-difference gradient oracle
// ---------------------------------------------------------------------------

namespace {

template <typename Task>
void parallel_for(std::size_t count, int threads, Task&& task)
{
    const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        for (std::size_t k = 0; k < count; ++k) task(k);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t k = w; k < count; k += workers) task(k);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

double objective(const Problem& problem, const ControlField& f)
{
    const StateTrajectory s = solve_forward(problem.u0, problem.v0, f, problem.params, problem.forward);
    return evaluate_cost(s, f, problem.targets, problem.weights, problem.params.p_exponent).j_total;
}

} // namespace

std::vector<double> fd_gradient(const Problem& problem, const ControlField& f,
                                const std::vector<ControlField>& directions, double eps, int threads)
{
    if (!(eps > 0.0)) throw PreconditionError("fd_gradient: eps must be positive");
    for (const auto& d : directions) f.require_same_layout(d, "fd_gradient");
    std::vector<double> out(directions.size(), 0.0);
    parallel_for(directions.size(), threads, [&](std::size_t k) {
        ControlField plus(f);
        plus.axpy(eps, directions[k]);
        ControlField minus(f);
        minus.axpy(-eps, directions[k]);
        out[k] = (objective(problem, plus) - objective(problem, minus)) / (2.0 * eps);
    });
    return out;
}

GradientField fd_gradient_field(const Problem& problem, const ControlField& f, double eps, int threads)
{
    const std::size_t dofs = f.values().size();
    GradientField out(f.time_grid(), f.region());
    const double measure = f.grid().cell_area() * f.time_grid().tau();
    parallel_for(dofs, threads, [&](std::size_t k) {
        ControlField plus(f);
        plus.values()[k] += eps;
        ControlField minus(f);
        minus.values()[k] -= eps;
        out.values()[k] = (objective(problem, plus) - objective(problem, minus)) / (2.0 * eps) / measure;
    });
    return out;
}

std::vector<ControlField> random_directions(const ControlField& layout, int count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<ControlField> out;
    for (int k = 0; k < count; ++k) {
        ControlField d(layout.time_grid(), layout.region());
        for (auto& x : d.values()) x = normal(rng);
        d *= 1.0 / d.l2_norm();
        out.push_back(std::move(d));
    }
    return out;
}

double cosine_similarity(const ControlField& a, const ControlField& b)
{
    const double na = a.l2_norm();
    const double nb = b.l2_norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.inner(b) / (na * nb);
}

std::vector<GradientCheckRow> gradient_check(const Problem& problem, const ControlField& f,
                                             const std::vector<ControlField>& directions, double eps, int threads)
{
    const GradientEvaluation ge = evaluate_gradient(problem, f);
    const std::vector<double> fd = fd_gradient(problem, f, directions, eps, threads);
    std::vector<GradientCheckRow> rows;
    for (std::size_t k = 0; k < directions.size(); ++k) {
        GradientCheckRow row;
        row.direction = static_cast<int>(k);
        row.adjoint = ge.gradient.inner(directions[k]);
        row.finite_difference = fd[k];
        const double scale = std::max(std::abs(row.adjoint), std::abs(row.finite_difference));
        row.relative_error = scale > 0.0 ? std::abs(row.adjoint - row.finite_difference) / scale : 0.0;
        rows.push_back(row);
    }
    return rows;
}

void write_csv(std::ostream& out, const std::vector<GradientCheckRow>& rows)
{
    out << "direction,adjoint,finite_difference,relative_error\n";
    for (const auto& r : rows) {
        out << r.direction << ',' << fmt(r.adjoint) << ',' << fmt(r.finite_difference) << ',' << fmt(r.relative_error)
            << '\n';
    }
}

DualityResult duality_check(const Problem& problem, const ControlField& f, const ControlField& direction)
{
    const GradientEvaluation ge = evaluate_gradient(problem, f);
    const StateTrajectory& state = ge.evaluation.state;
    const TangentTrajectory tan = solve_tangent(state, f, direction, problem.params, problem.adjoint);

    const TimeGrid& tg = state.time_grid;
    const double tau = tg.tau();
    double tracking = 0.0;
    for (int n = 1; n <= tg.steps; ++n) {
        const double w = trapezoid_weight(n, tg.steps) * tau;
        const Field2D ru = state.u[n] - problem.targets.u_at(n);
        const Field2D rv = state.v[n] - problem.targets.v_at(n);
        tracking += w * (problem.weights.gamma_u * inner(ru, tan.du[n]) + problem.weights.gamma_v * inner(rv, tan.dv[n]));
    }
    double control_part = 0.0;
    for (std::size_t k = 0; k < f.values().size(); ++k) {
        control_part += signed_power(f.values()[k], problem.params.p_exponent) * direction.values()[k];
    }
    control_part *= problem.weights.gamma_f * f.grid().cell_area() * tau;

    DualityResult r;
    r.tangent_derivative = tracking + control_part;
    r.adjoint_derivative = ge.gradient.inner(direction);
    const double scale = std::max(std::abs(r.tangent_derivative), std::abs(r.adjoint_derivative));
    r.relative_error = scale > 0.0 ? std::abs(r.tangent_derivative - r.adjoint_derivative) / scale : 0.0;
    return r;
}

// ---------------------------------------------------------------------------
// Continuous dependence
// ---------------------------------------------------------------------------

double space_time_distance(const std::vector<Field2D>& a, const std::vector<Field2D>& b, double tau)
{
    if (a.size() != b.size()) throw PreconditionError("space_time_distance: trajectories differ in length");
    double s = 0.0;
    for (std::size_t n = 1; n < a.size(); ++n) {
        const Field2D d = a[n] - b[n];
        s += tau * inner(d, d);
    }
    return std::sqrt(s);
}

namespace {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t n = x.size();
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += std::log(x[k]);
        my += std::log(y[k]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double dx = std::log(x[k]) - mx;
        sxy += dx * (std::log(y[k]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

} // namespace

PerturbationStudy perturbation_study(const Field2D& u0, const Field2D& v0, const ControlField& f,
                                     const ControlField& g, const ModelParams& params,
                                     const ForwardSettings& settings, const std::vector<double>& deltas)
{
    if (deltas.size() < 2) throw PreconditionError("perturbation_study needs at least two deltas");
    const StateTrajectory base = solve_forward(u0, v0, f, params, settings);
    PerturbationStudy study;
    study.deltas = deltas;
    for (double delta : deltas) {
        ControlField fp(f);
        fp.axpy(delta, g);
        const StateTrajectory s = solve_forward(u0, v0, fp, params, settings);
        study.differences.push_back(space_time_distance(base.u, s.u, f.time_grid().tau()));
    }
    study.slope = loglog_slope(study.deltas, study.differences);
    return study;
}

// ---------------------------------------------------------------------------
// Analytic references
// ---------------------------------------------------------------------------

double logistic_closed_form(double u0, double r, double mu, double t)
{
    if (u0 == 0.0) return 0.0;
    if (r == 0.0) return u0 / (1.0 + mu * u0 * t);
    return r * u0 / (mu * u0 + (r - mu * u0) * std::exp(-r * t));
}

double neumann_mode_decay_rate(double lx, double ly, int kx, int ky)
{
    const double ax = kx * pi / lx;
    const double ay = ky * pi / ly;
    return 1.0 + ax * ax + ay * ay;
}

LogisticRun run_logistic(double u0, double r, double mu, double final_time, int steps, int n)
{
    const GridSpec grid(1.0, 1.0, n, n);
    const TimeGrid tg(final_time, steps);
    ModelParams params;
    params.r = r;
    params.mu = mu;
    const ControlField zero(tg, RegionMask::whole(grid));
    ForwardSettings settings;
    const StateTrajectory s = solve_forward(Field2D(grid, u0), Field2D(grid, 0.0), zero, params, settings);

    LogisticRun run;
    for (int k = 0; k <= steps; ++k) {
        run.times.push_back(tg.time(k));
        run.values.push_back(integrate(s.u[k]) / grid.area());
        run.spatial_spread = std::max(run.spatial_spread, s.u[k].max() - s.u[k].min());
    }
    return run;
}

double observed_heat_decay_rate(const GridSpec& grid, int kx, double final_time, int steps)
{
    const Field2D mode = Field2D::from_function(grid, [&](double x, double) { return std::cos(kx * pi * x / grid.lx); });
    const double norm2 = inner(mode, mode);
    const double tau = final_time / steps;
    const Field2D zero(grid);
    CgSettings cg;
    cg.rel_tol = 1e-13;
    Field2D v(mode);
    for (int n = 0; n < steps; ++n) v = step_v(v, zero, zero, zero, tau, cg);
    const double a0 = 1.0;
    const double a1 = inner(v, mode) / norm2;
    return -std::log(a1 / a0) / final_time;
}

std::vector<ReferenceCheck> analytic_references()
{
    std::vector<ReferenceCheck> out;
    {
        const LogisticRun run = run_logistic(0.1, 1.0, 2.0, 20.0, 2000);
        ReferenceCheck c{"logistic_equilibrium", run.values.back(), 0.5, 0.0, 1e-3, false};
        c.error = std::abs(c.observed - c.expected);
        c.pass = c.error <= c.tolerance;
        out.push_back(c);
    }
    {
        const GridSpec grid(1.0, 1.0, 64, 64);
        ReferenceCheck c{"heat_mode_decay", observed_heat_decay_rate(grid, 1, 0.1, 1000),
                         neumann_mode_decay_rate(1.0, 1.0, 1, 0), 0.0, 1e-2, false};
        c.error = std::abs(c.observed - c.expected) / c.expected;
        c.pass = c.error <= c.tolerance;
        out.push_back(c);
    }
    {
        const GridSpec grid(1.0, 1.0, 8, 8);
        const TimeGrid tg(1.0, 10);
        ModelParams params;
        params.kappa = 1.0;
        params.r = 1.0;
        const StateTrajectory s = solve_forward(Field2D(grid), Field2D(grid), ControlField(tg, RegionMask::whole(grid)),
                                                params, ForwardSettings{});
        double worst = 0.0;
        for (int n = 0; n <= tg.steps; ++n) {
            worst = std::max({worst, norms(s.u[n]).linf, norms(s.v[n]).linf});
        }
        out.push_back({"zero_fixture", worst, 0.0, worst, 0.0, worst == 0.0});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Manufactured solutions
// ---------------------------------------------------------------------------

namespace {

// u* = a(t) (1 + phi/2), v* = b(t) (1 + psi/2) on the unit square with
// phi = cos(pi x) cos(pi y), psi = cos(2 pi x) cos(pi y); both satisfy the
// zero-flux condition.
struct Manufactured {
    double kappa;
    double r;
    double mu;

    static double a(double t) { return 1.0 + 0.5 * std::sin(2.0 * pi * t); }
    static double da(double t) { return pi * std::cos(2.0 * pi * t); }
    static double b(double t) { return 1.0 + 0.5 * std::cos(2.0 * pi * t); }
    static double db(double t) { return -pi * std::sin(2.0 * pi * t); }

    static double u(double t, double x, double y) { return a(t) * (1.0 + 0.5 * std::cos(pi * x) * std::cos(pi * y)); }
    static double v(double t, double x, double y) { return b(t) * (1.0 + 0.5 * std::cos(2.0 * pi * x) * std::cos(pi * y)); }

    void sources(double t, double x, double y, double& su, double& sv) const
    {
        const double phi = std::cos(pi * x) * std::cos(pi * y);
        const double phi_x = -pi * std::sin(pi * x) * std::cos(pi * y);
        const double phi_y = -pi * std::cos(pi * x) * std::sin(pi * y);
        const double lap_phi = -2.0 * pi * pi * phi;
        const double psi = std::cos(2.0 * pi * x) * std::cos(pi * y);
        const double psi_x = -2.0 * pi * std::sin(2.0 * pi * x) * std::cos(pi * y);
        const double psi_y = -pi * std::cos(2.0 * pi * x) * std::sin(pi * y);
        const double lap_psi = -5.0 * pi * pi * psi;

        const double uu = a(t) * (1.0 + 0.5 * phi);
        const double ut = da(t) * (1.0 + 0.5 * phi);
        const double ux = 0.5 * a(t) * phi_x;
        const double uy = 0.5 * a(t) * phi_y;
        const double lap_u = 0.5 * a(t) * lap_phi;

        const double vv = b(t) * (1.0 + 0.5 * psi);
        const double vt = db(t) * (1.0 + 0.5 * psi);
        const double vx = 0.5 * b(t) * psi_x;
        const double vy = 0.5 * b(t) * psi_y;
        const double lap_v = 0.5 * b(t) * lap_psi;

        const double chemo = ux * vx + uy * vy + uu * lap_v;
        su = ut - lap_u + kappa * chemo - r * uu + mu * uu * uu;
        sv = vt - lap_v + vv - uu;
    }
};

struct MmsErrors {
    double u = 0.0;
    double v = 0.0;
};

MmsErrors run_mms(int cells, int steps, const MmsOptions& options)
{
    const GridSpec grid(1.0, 1.0, cells, cells);
    const TimeGrid tg(options.final_time, steps);
    ModelParams params;
    params.kappa = options.kappa;
    params.r = options.r;
    params.mu = options.mu;
    const Manufactured m{options.kappa, options.r, options.mu};

    ForwardSettings settings;
    settings.scheme = options.scheme;
    settings.picard.tol = 1e-11;
    settings.picard.max_iters = 200;
    settings.cg.rel_tol = 1e-12;

    const Field2D u0 = Field2D::from_function(grid, [](double x, double y) { return Manufactured::u(0.0, x, y); });
    const Field2D v0 = Field2D::from_function(grid, [](double x, double y) { return Manufactured::v(0.0, x, y); });
    const SourceTerms sources = [&](double t, Field2D& su, Field2D& sv) {
        for (int j = 0; j < grid.ny; ++j) {
            for (int i = 0; i < grid.nx; ++i) {
                m.sources(t, grid.x_center(i), grid.y_center(j), su(i, j), sv(i, j));
            }
        }
    };
    const StateTrajectory s =
        solve_forward(u0, v0, ControlField(tg, RegionMask::whole(grid)), params, settings, sources);

    std::vector<Field2D> ue;
    std::vector<Field2D> ve;
    for (int n = 0; n <= steps; ++n) {
        const double t = tg.time(n);
        ue.push_back(Field2D::from_function(grid, [t](double x, double y) { return Manufactured::u(t, x, y); }));
        ve.push_back(Field2D::from_function(grid, [t](double x, double y) { return Manufactured::v(t, x, y); }));
    }
    return MmsErrors{space_time_distance(s.u, ue, tg.tau()), space_time_distance(s.v, ve, tg.tau())};
}

} // namespace

ConvergenceTable mms_convergence(int levels, const MmsOptions& options)
{
    if (levels < 3) throw PreconditionError("mms_convergence needs at least 3 levels");
    ConvergenceTable table;
    for (int level = 0; level < levels; ++level) {
        int cells = 0;
        int steps = 0;
        if (options.study == MmsStudy::spatial) {
            cells = options.base_cells << level;
            steps = options.base_steps << (2 * level);
        } else {
            cells = options.fixed_cells;
            steps = options.base_steps << level;
        }
        const MmsErrors e = run_mms(cells, steps, options);
        ConvergenceRow row;
        row.h = 1.0 / cells;
        row.tau = options.final_time / steps;
        row.error_u = e.u;
        row.error_v = e.v;
        if (!table.rows.empty()) {
            const ConvergenceRow& prev = table.rows.back();
            const double ratio = options.study == MmsStudy::spatial ? prev.h / row.h : prev.tau / row.tau;
            row.order_u = std::log(prev.error_u / row.error_u) / std::log(ratio);
            row.order_v = std::log(prev.error_v / row.error_v) / std::log(ratio);
        }
        table.rows.push_back(row);
    }
    return table;
}

void write_csv(std::ostream& out, const ConvergenceTable& table)
{
    out << "h,tau,error_u,error_v,order_u,order_v\n";
    for (const auto& r : table.rows) {
        out << fmt(r.h) << ',' << fmt(r.tau) << ',' << fmt(r.error_u) << ',' << fmt(r.error_v) << ','
            << fmt(r.order_u) << ',' << fmt(r.order_v) << '\n';
    }
}

} // namespace ksopt
