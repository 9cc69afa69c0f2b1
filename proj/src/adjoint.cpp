#include "ksopt/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ksopt {

namespace {

double increment_norm(const Field2D& next, const Field2D& prev, double& scale)
{
    double d = 0.0;
    double n = 0.0;
    for (std::size_t k = 0; k < next.size(); ++k) {
        d += (next[k] - prev[k]) * (next[k] - prev[k]);
        n += next[k] * next[k];
    }
    scale = std::sqrt(n);
    return std::sqrt(d);
}

bool converged(const Field2D& a_new, const Field2D& a_old, const Field2D& b_new, const Field2D& b_old, double tol,
               double& increment)
{
    double sa = 0.0;
    double sb = 0.0;
    const double da = increment_norm(a_new, a_old, sa);
    const double db = increment_norm(b_new, b_old, sb);
    const double scale = std::max(sa, sb);
    if (da == 0.0 && db == 0.0) {
        increment = 0.0;
        return true;
    }
    increment = scale > 0.0 ? std::max(da, db) / scale : HUGE_VAL;
    return std::max(da, db) <= tol * scale;
}

Field2D heaviside(const Field2D& f)
{
    Field2D h(f.grid());
    for (std::size_t k = 0; k < f.size(); ++k) h[k] = f[k] > 0.0 ? 1.0 : 0.0;
    return h;
}

// Frozen coefficients of the forward Jacobian at one state level.
struct Linearization {
    Field2D u_plus;
    Field2D h_u;
    Field2D h_v;
    Field2D v_plus;
    Field2D potential; // kappa * v
    FaceField faces;   // face values of u_plus
    ShiftedLaplacian op_u;
    ShiftedLaplacian op_v;

    Linearization(const Field2D& u, const Field2D& v, const ModelParams& params, double tau, FluxScheme scheme)
        : u_plus(u.positive_part()), h_u(heaviside(u)), h_v(heaviside(v)), v_plus(v.positive_part()),
          potential(params.kappa * Field2D(v)), faces(face_density(u_plus, potential, scheme)),
          op_u(u.grid(), 1.0 / tau, reaction(u_plus, params.mu)), op_v(u.grid(), 1.0 / tau + 1.0)
    {
    }

    static std::vector<double> reaction(const Field2D& u_plus, double mu)
    {
        std::vector<double> out(u_plus.size());
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = 2.0 * mu * u_plus[k];
        return out;
    }
};

} // namespace

AdjointStepResult step_adjoint(const Field2D& lambda_next, const Field2D& eta_next, const AdjointStepData& data,
                               const ModelParams& params, const CostWeights& weights, double tau, FluxScheme scheme,
                               const AdjointSettings& settings)
{
    require_same_grid(lambda_next, eta_next, "step_adjoint");
    require_same_grid(lambda_next, data.u, "step_adjoint");
    require_same_grid(lambda_next, data.v, "step_adjoint");
    require_same_grid(lambda_next, data.f, "step_adjoint");
    require_same_grid(lambda_next, data.u_d, "step_adjoint");
    require_same_grid(lambda_next, data.v_d, "step_adjoint");
    if (!(tau > 0.0)) throw PreconditionError("step_adjoint: tau must be positive");

    const GridSpec& g = lambda_next.grid();
    const Linearization lin(data.u, data.v, params, tau, scheme);

    Field2D source_lambda(g);
    Field2D source_eta(g);
    const double wu = weights.gamma_u * data.quadrature_weight;
    const double wv = weights.gamma_v * data.quadrature_weight;
    for (std::size_t k = 0; k < g.cells(); ++k) {
        source_lambda[k] = lambda_next[k] / tau + wu * (data.u[k] - data.u_d[k]);
        source_eta[k] = eta_next[k] / tau + wv * (data.v[k] - data.v_d[k]);
    }

    Field2D lambda_bar(lambda_next);
    Field2D eta_bar(eta_next);
    double increment = HUGE_VAL;
    for (int sweep = 1; sweep <= settings.max_iters; ++sweep) {
        const Field2D transport = chemotaxis_density_transpose(lin.potential, lambda_bar, scheme);
        Field2D rhs_lambda(source_lambda);
        for (std::size_t k = 0; k < g.cells(); ++k) {
            rhs_lambda[k] += lin.h_u[k] * (eta_bar[k] + params.r * lambda_bar[k] - transport[k]);
        }
        Field2D lambda = solve_shifted_laplacian(lin.op_u, rhs_lambda, lambda_bar, settings.cg);

        const Field2D coupling = weighted_divergence(lin.faces, lambda);
        Field2D rhs_eta(source_eta);
        for (std::size_t k = 0; k < g.cells(); ++k) {
            rhs_eta[k] += data.f[k] * lin.h_v[k] * eta_bar[k] - params.kappa * coupling[k];
        }
        Field2D eta = solve_shifted_laplacian(lin.op_v, rhs_eta, eta_bar, settings.cg);

        if (!lambda.all_finite() || !eta.all_finite()) {
            throw SolverError("adjoint step produced non-finite values", HUGE_VAL);
        }
        const bool done = converged(lambda, lambda_bar, eta, eta_bar, settings.tol, increment);
        lambda_bar = std::move(lambda);
        eta_bar = std::move(eta);
        if (done) return AdjointStepResult{std::move(lambda_bar), std::move(eta_bar), sweep};
    }
    throw SolverError("adjoint block iteration did not converge in " + std::to_string(settings.max_iters) +
                          " sweeps (last relative increment " + std::to_string(increment) + ")",
                      increment);
}

AdjointTrajectory solve_adjoint(const StateTrajectory& state, const ControlField& control, const Targets& targets,
                                const ModelParams& params, const CostWeights& weights,
                                const AdjointSettings& settings)
{
    const TimeGrid& tg = state.time_grid;
    if (!(control.time_grid() == tg)) throw GridMismatch("solve_adjoint: control and state time grids differ");
    if (static_cast<int>(state.u.size()) != tg.levels() || static_cast<int>(state.v.size()) != tg.levels()) {
        throw PreconditionError("solve_adjoint: state trajectory is incomplete");
    }
    const GridSpec& g = state.grid();
    if (!(control.grid() == g)) throw GridMismatch("solve_adjoint: control grid differs from state grid");
    targets.check(g, tg);

    const double tau = tg.tau();
    // Reversed time s_k = T - t_{steps-k}: marching k = 0..steps forward in s.
    std::vector<Field2D> lambda_s;
    std::vector<Field2D> eta_s;
    std::vector<int> sweeps_s;
    lambda_s.reserve(tg.levels());
    eta_s.reserve(tg.levels());
    lambda_s.emplace_back(g);
    eta_s.emplace_back(g);
    for (int k = 1; k <= tg.steps; ++k) {
        const int n = tg.steps - k; // multiplier index; paired state level n + 1
        const Field2D f = control.level_field(n);
        const AdjointStepData data{state.u[n + 1], state.v[n + 1], f, targets.u_at(n + 1), targets.v_at(n + 1),
                                   trapezoid_weight(n + 1, tg.steps)};
        try {
            AdjointStepResult res =
                step_adjoint(lambda_s.back(), eta_s.back(), data, params, weights, tau, state.scheme, settings);
            lambda_s.push_back(std::move(res.lambda));
            eta_s.push_back(std::move(res.eta));
            sweeps_s.push_back(res.sweeps);
        } catch (const SolverError& e) {
            throw SolverError(std::string(e.what()) + " at level " + std::to_string(n), e.residual(), n);
        }
    }

    AdjointTrajectory out;
    out.time_grid = tg;
    out.lambda.assign(std::make_move_iterator(lambda_s.rbegin()), std::make_move_iterator(lambda_s.rend()));
    out.eta.assign(std::make_move_iterator(eta_s.rbegin()), std::make_move_iterator(eta_s.rend()));
    out.sweeps.assign(sweeps_s.rbegin(), sweeps_s.rend());
    return out;
}

TangentTrajectory solve_tangent(const StateTrajectory& state, const ControlField& control,
                                const ControlField& direction, const ModelParams& params,
                                const AdjointSettings& settings)
{
    control.require_same_layout(direction, "solve_tangent");
    const TimeGrid& tg = state.time_grid;
    if (!(control.time_grid() == tg)) throw GridMismatch("solve_tangent: control and state time grids differ");
    const GridSpec& g = state.grid();
    const double tau = tg.tau();

    TangentTrajectory out;
    out.du.emplace_back(g);
    out.dv.emplace_back(g);
    for (int n = 0; n < tg.steps; ++n) {
        const Field2D& u = state.u[n + 1];
        const Field2D& v = state.v[n + 1];
        const Linearization lin(u, v, params, tau, state.scheme);
        const Field2D f = control.level_field(n);
        const Field2D df = direction.level_field(n);

        Field2D source_u(out.du.back());
        source_u *= 1.0 / tau;
        Field2D source_v(out.dv.back());
        source_v *= 1.0 / tau;
        for (std::size_t k = 0; k < g.cells(); ++k) source_v[k] += df[k] * lin.v_plus[k];

        Field2D u_bar(out.du.back());
        Field2D v_bar(out.dv.back());
        double increment = HUGE_VAL;
        bool done = false;
        for (int sweep = 1; sweep <= settings.max_iters && !done; ++sweep) {
            Field2D rhs_v(source_v);
            for (std::size_t k = 0; k < g.cells(); ++k) {
                rhs_v[k] += lin.h_u[k] * u_bar[k] + f[k] * lin.h_v[k] * v_bar[k];
            }
            Field2D dv = solve_shifted_laplacian(lin.op_v, rhs_v, v_bar, settings.cg);

            Field2D masked(u_bar);
            for (std::size_t k = 0; k < g.cells(); ++k) masked[k] *= lin.h_u[k];
            const Field2D transport = chemotaxis_divergence(masked, lin.potential, state.scheme);
            const Field2D coupling = weighted_divergence(lin.faces, dv);
            Field2D rhs_u(source_u);
            for (std::size_t k = 0; k < g.cells(); ++k) {
                rhs_u[k] += params.r * lin.h_u[k] * u_bar[k] - transport[k] - params.kappa * coupling[k];
            }
            Field2D du = solve_shifted_laplacian(lin.op_u, rhs_u, u_bar, settings.cg);

            done = converged(du, u_bar, dv, v_bar, settings.tol, increment);
            u_bar = std::move(du);
            v_bar = std::move(dv);
        }
        if (!done) {
            throw SolverError("tangent block iteration did not converge at step " + std::to_string(n), increment, n);
        }
        out.du.push_back(std::move(u_bar));
        out.dv.push_back(std::move(v_bar));
    }
    return out;
}

} // namespace ksopt
