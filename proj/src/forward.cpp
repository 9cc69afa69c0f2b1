#include "ksopt/forward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ksopt {

void ModelParams::validate() const
{
    if (!std::isfinite(kappa) || !std::isfinite(r)) throw PreconditionError("model coefficients must be finite");
    if (!(mu > 0.0) || !std::isfinite(mu)) throw PreconditionError("model.mu must be positive");
    if (!(p_exponent > 2.0 && p_exponent < 3.0)) throw PreconditionError("model.p_exponent must lie in (2, 3)");
}

void PicardSettings::validate() const
{
    if (max_iters < 1) throw PreconditionError("picard max_iters must be >= 1");
    if (!(tol > 0.0)) throw PreconditionError("picard tolerance must be positive");
}

Field2D step_v(const Field2D& v_prev, const Field2D& u_bar, const Field2D& v_bar, const Field2D& f_now, double tau,
               const CgSettings& cg, const Field2D* source)
{
    require_same_grid(v_prev, u_bar, "step_v");
    require_same_grid(v_prev, v_bar, "step_v");
    require_same_grid(v_prev, f_now, "step_v");
    if (!(tau > 0.0)) throw PreconditionError("step_v: tau must be positive");

    const GridSpec& g = v_prev.grid();
    Field2D rhs(g);
    for (std::size_t k = 0; k < g.cells(); ++k) {
        rhs[k] = v_prev[k] / tau + std::max(u_bar[k], 0.0) + f_now[k] * std::max(v_bar[k], 0.0);
    }
    if (source) rhs += *source;
    const ShiftedLaplacian op(g, 1.0 / tau + 1.0);
    return solve_shifted_laplacian(op, rhs, v_bar, cg);
}

Field2D step_u(const Field2D& u_prev, const Field2D& u_bar, const Field2D& v_new, const ModelParams& params,
               double tau, FluxScheme scheme, const CgSettings& cg, const Field2D* source)
{
    require_same_grid(u_prev, u_bar, "step_u");
    require_same_grid(u_prev, v_new, "step_u");
    if (!(tau > 0.0)) throw PreconditionError("step_u: tau must be positive");

    const GridSpec& g = u_prev.grid();
    const Field2D u_plus = u_bar.positive_part();
    Field2D potential(v_new);
    potential *= params.kappa;
    const Field2D chemo = chemotaxis_divergence(u_plus, potential, scheme);

    Field2D rhs(g);
    std::vector<double> reaction(g.cells());
    for (std::size_t k = 0; k < g.cells(); ++k) {
        rhs[k] = u_prev[k] / tau + params.r * u_plus[k] - chemo[k];
        reaction[k] = params.mu * u_plus[k];
    }
    if (source) rhs += *source;
    const ShiftedLaplacian op(g, 1.0 / tau, std::move(reaction));
    Field2D u = solve_shifted_laplacian(op, rhs, u_bar, cg);

    // Remove the CG residual's contribution to the total mass so the discrete
    // mass balance holds to round-off rather than to the solver tolerance.
    double rhs_total = 0.0;
    for (double x : rhs.values()) rhs_total += x;
    const double defect = rhs_total - op.total(u.values());
    const Field2D ones(g, 1.0);
    const double column_total = op.total(ones.values());
    const double shift = defect / column_total;
    for (auto& x : u.values()) x += shift;
    return u;
}

namespace {

double l2(const Field2D& f)
{
    double s = 0.0;
    for (double x : f.values()) s += x * x;
    return std::sqrt(s);
}

double relative_increment(const Field2D& next, const Field2D& prev)
{
    double d = 0.0;
    for (std::size_t k = 0; k < next.size(); ++k) d += (next[k] - prev[k]) * (next[k] - prev[k]);
    d = std::sqrt(d);
    const double n = l2(next);
    if (d == 0.0) return 0.0;
    return n > 0.0 ? d / n : HUGE_VAL;
}

} // namespace

PicardResult picard_step(const Field2D& u_prev, const Field2D& v_prev, const Field2D& f_now,
                         const ModelParams& params, double tau, const ForwardSettings& settings,
                         const Field2D* source_u, const Field2D* source_v)
{
    Field2D u_bar(u_prev);
    Field2D v_bar(v_prev);
    double increment = HUGE_VAL;
    for (int it = 1; it <= settings.picard.max_iters; ++it) {
        Field2D v_new = step_v(v_prev, u_bar, v_bar, f_now, tau, settings.cg, source_v);
        Field2D u_new = step_u(u_prev, u_bar, v_new, params, tau, settings.scheme, settings.cg, source_u);
        if (!u_new.all_finite() || !v_new.all_finite()) {
            throw SolverError("picard iteration produced non-finite values", HUGE_VAL);
        }
        increment = std::max(relative_increment(u_new, u_bar), relative_increment(v_new, v_bar));

        StepRecord record;
        record.picard_iters = it;
        const Field2D u_plus = u_bar.positive_part();
        record.lagged_mass = integrate(u_plus);
        record.lagged_damping = inner(u_plus, u_new);

        if (increment < settings.picard.tol) {
            return PicardResult{std::move(u_new), std::move(v_new), it, increment, record};
        }
        u_bar = std::move(u_new);
        v_bar = std::move(v_new);
    }
    throw SolverError("picard iteration did not converge in " + std::to_string(settings.picard.max_iters) +
                          " sweeps (last relative increment " + std::to_string(increment) +
                          "); reduce the time step",
                      increment);
}

StateTrajectory solve_forward(const Field2D& u0, const Field2D& v0, const ControlField& control,
                              const ModelParams& params, const ForwardSettings& settings, const SourceTerms& sources)
{
    require_same_grid(u0, v0, "solve_forward");
    if (!(control.grid() == u0.grid())) throw GridMismatch("solve_forward: control grid differs from state grid");
    if (!u0.all_finite() || !v0.all_finite()) throw PreconditionError("initial data must be finite");
    if (u0.min() < 0.0 || v0.min() < 0.0) throw PreconditionError("initial data must be nonnegative");
    params.validate();
    settings.picard.validate();

    const TimeGrid& tg = control.time_grid();
    const double tau = tg.tau();
    StateTrajectory traj;
    traj.time_grid = tg;
    traj.scheme = settings.scheme;
    traj.u.reserve(tg.levels());
    traj.v.reserve(tg.levels());
    traj.steps.reserve(tg.steps);
    traj.u.push_back(u0);
    traj.v.push_back(v0);

    const GridSpec& g = u0.grid();
    Field2D su(g);
    Field2D sv(g);
    for (int n = 0; n < tg.steps; ++n) {
        const Field2D f_now = control.level_field(n);
        if (sources) {
            su = Field2D(g);
            sv = Field2D(g);
            sources(tg.time(n + 1), su, sv);
        }
        try {
            PicardResult res = picard_step(traj.u.back(), traj.v.back(), f_now, params, tau, settings,
                                           sources ? &su : nullptr, sources ? &sv : nullptr);
            traj.u.push_back(std::move(res.u));
            traj.v.push_back(std::move(res.v));
            traj.steps.push_back(res.record);
        } catch (const SolverError& e) {
            throw SolverError(std::string(e.what()) + " at step " + std::to_string(n), e.residual(), n);
        }
    }
    return traj;
}

} // namespace ksopt
