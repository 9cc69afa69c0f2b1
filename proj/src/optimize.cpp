#include "ksopt/optimize.hpp"

#include <cmath>

namespace ksopt {

CostBreakdown evaluate_cost(const StateTrajectory& state, const ControlField& f, const Targets& targets,
                            const CostWeights& weights, double p)
{
    const TimeGrid& tg = state.time_grid;
    if (!(f.time_grid() == tg)) throw GridMismatch("evaluate_cost: control and state time grids differ");
    targets.check(state.grid(), tg);

    const double tau = tg.tau();
    double su = 0.0;
    double sv = 0.0;
    for (int n = 0; n <= tg.steps; ++n) {
        const double w = trapezoid_weight(n, tg.steps) * tau;
        const Field2D du = state.u[n] - targets.u_at(n);
        const Field2D dv = state.v[n] - targets.v_at(n);
        su += w * inner(du, du);
        sv += w * inner(dv, dv);
    }
    CostBreakdown c;
    c.j_u = 0.5 * weights.gamma_u * su;
    c.j_v = 0.5 * weights.gamma_v * sv;
    c.j_f = control_cost(f, weights.gamma_f, p);
    c.j_total = c.j_u + c.j_v + c.j_f;
    return c;
}

void Problem::validate() const
{
    params.validate();
    set.validate();
    weights.validate(set);
    require_same_grid(u0, v0, "Problem");
    if (!(region.grid() == u0.grid())) throw GridMismatch("Problem: control region grid differs from state grid");
    if (region.count() == 0) throw PreconditionError("control region contains no cells");
    if (u0.min() < 0.0 || v0.min() < 0.0) throw PreconditionError("initial data must be nonnegative");
    targets.check(u0.grid(), time_grid);
    forward.picard.validate();
}

void OptimizeOptions::validate() const
{
    if (max_iters < 0) throw PreconditionError("optimizer.max_iters must be >= 0");
    if (!(vi_tol > 0.0)) throw PreconditionError("optimizer.vi_tol must be positive");
    if (!(armijo.c1 > 0.0 && armijo.c1 < 1.0)) throw PreconditionError("optimizer.armijo_c1 must lie in (0, 1)");
    if (!(armijo.shrink > 0.0 && armijo.shrink < 1.0)) {
        throw PreconditionError("optimizer.armijo_shrink must lie in (0, 1)");
    }
    if (!(armijo.s0 > 0.0)) throw PreconditionError("optimizer.armijo_s0 must be positive");
    if (armijo.max_backtracks < 0) throw PreconditionError("optimizer.armijo_max_backtracks must be >= 0");
}

Evaluation evaluate(const Problem& problem, const ControlField& f)
{
    Evaluation e;
    e.state = solve_forward(problem.u0, problem.v0, f, problem.params, problem.forward);
    e.cost = evaluate_cost(e.state, f, problem.targets, problem.weights, problem.params.p_exponent);
    return e;
}

GradientEvaluation evaluate_gradient(const Problem& problem, const ControlField& f)
{
    GradientEvaluation g;
    g.evaluation = evaluate(problem, f);
    g.adjoint = solve_adjoint(g.evaluation.state, f, problem.targets, problem.params, problem.weights, problem.adjoint);
    g.gradient = reduced_gradient(f, g.evaluation.state, g.adjoint, problem.weights.gamma_f, problem.params.p_exponent);
    return g;
}

std::string to_string(StopReason reason)
{
    switch (reason) {
    case StopReason::vi_tol: return "vi_tol";
    case StopReason::max_iters: return "max_iters";
    case StopReason::line_search_failure: return "line_search_failure";
    }
    return "unknown";
}

OptimizeReport solve(const Problem& problem, const ControlField& f0, const OptimizeOptions& options)
{
    problem.validate();
    options.validate();
    if (!(f0.time_grid() == problem.time_grid) || !(f0.region() == problem.region)) {
        throw GridMismatch("solve: initial control does not match the problem layout");
    }
    const ArmijoSettings& ls = options.armijo;

    ControlField f = project(f0, problem.set);
    GradientEvaluation current = evaluate_gradient(problem, f);
    double vi = vi_residual(f, current.gradient, problem.set, ls.s0);

    OptimizeReport report;
    report.iterates.push_back(IterateRecord{0, current.evaluation.cost, vi, 0.0, 0});

    for (int it = 1;; ++it) {
        if (vi <= options.vi_tol) {
            report.converged = true;
            report.reason = StopReason::vi_tol;
            break;
        }
        if (it > options.max_iters) {
            report.reason = StopReason::max_iters;
            break;
        }

        const double j = current.evaluation.cost.j_total;
        double s = ls.s0;
        bool accepted = false;
        int backtracks = 0;
        ControlField trial;
        Evaluation trial_eval;
        for (; backtracks <= ls.max_backtracks; ++backtracks, s *= ls.shrink) {
            trial = f;
            trial.axpy(-s, current.gradient);
            project_in_place(trial, problem.set);
            const double mapped = (f - trial).l2_norm() / s;
            if (mapped == 0.0) break;
            try {
                trial_eval = evaluate(problem, trial);
            } catch (const SolverError&) {
                continue;
            }
            const double jt = trial_eval.cost.j_total;
            if (jt <= j - ls.c1 * s * mapped * mapped && jt < j) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            report.reason = StopReason::line_search_failure;
            break;
        }

        f = std::move(trial);
        current.evaluation = std::move(trial_eval);
        current.adjoint = solve_adjoint(current.evaluation.state, f, problem.targets, problem.params,
                                        problem.weights, problem.adjoint);
        current.gradient = reduced_gradient(f, current.evaluation.state, current.adjoint, problem.weights.gamma_f,
                                            problem.params.p_exponent);
        vi = vi_residual(f, current.gradient, problem.set, ls.s0);
        report.iterates.push_back(IterateRecord{it, current.evaluation.cost, vi, s, backtracks});
    }
    report.control = std::move(f);
    return report;
}

OptimizeReport solve_multistart(const Problem& problem, const std::vector<ControlField>& starts,
                                const OptimizeOptions& options)
{
    if (starts.empty()) throw PreconditionError("solve_multistart: no starting controls");
    OptimizeReport best;
    bool have = false;
    for (const auto& start : starts) {
        OptimizeReport r = solve(problem, start, options);
        if (!have || r.iterates.back().cost.j_total < best.iterates.back().cost.j_total) {
            best = std::move(r);
            have = true;
        }
    }
    return best;
}

KktReport kkt_report(const ControlField& f, const StateTrajectory& state, const AdjointTrajectory& adj,
                     const AdmissibleSet& set, const CostWeights& weights, double p, double step)
{
    const GradientField d = reduced_gradient(f, state, adj, weights.gamma_f, p);
    KktReport k;
    k.vi_residual = vi_residual(f, d, set, step);
    k.pointwise_max_violation = d.max_abs();
    return k;
}

} // namespace ksopt
