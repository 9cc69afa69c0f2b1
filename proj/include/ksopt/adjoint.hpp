#pragma once

#include <vector>

#include "ksopt/control_field.hpp"
#include "ksopt/forward.hpp"
#include "ksopt/objective.hpp"

/**
 * @file adjoint.hpp
 * @brief Backward solver for the Lagrange multipliers (lambda, eta).
 *
 * The continuous system is
 *
 *   -lambda_t - Lap lambda - kappa grad(lambda).grad(v) - eta - r lambda + 2 mu u lambda = gamma_u (u - u_d)
 *   -eta_t    - Lap eta + eta + kappa div(u grad(lambda)) - f eta 1_{Omega_c}            = gamma_v (v - v_d)
 *
 * with lambda(T) = eta(T) = 0 and zero-flux boundaries. Its discretization
 * is the exact transpose of the linearized forward step: every spatial
 * operator is the transpose of the matching forward stencil and the time
 * stepping mirrors backward Euler, so the reduced gradient is exact for the
 * discrete objective.
 *
 * Indexing: lambda[n], eta[n] (0 <= n < steps) are the multipliers of the
 * forward step n -> n+1 and are paired with the state at level n+1 and the
 * control level n. lambda[steps] = eta[steps] = 0.
 */

namespace ksopt {

struct AdjointSettings {
    int max_iters = 100; ///< block sweeps per level
    double tol = 1e-12;  ///< relative increment of (lambda, eta)
    CgSettings cg{1e-12, 5000};
};

struct AdjointTrajectory {
    TimeGrid time_grid;
    std::vector<Field2D> lambda; ///< levels 0..steps
    std::vector<Field2D> eta;
    std::vector<int> sweeps; ///< block sweeps used for level n, 0..steps-1
};

/// State-dependent coefficients of one backward step.
struct AdjointStepData {
    const Field2D& u;   ///< state at the paired level
    const Field2D& v;
    const Field2D& f;   ///< control (full grid, zero off-region) of the paired forward step
    const Field2D& u_d; ///< targets at the paired level
    const Field2D& v_d;
    double quadrature_weight = 1.0; ///< trapezoid weight of the paired level
};

struct AdjointStepResult {
    Field2D lambda;
    Field2D eta;
    int sweeps = 0;
};

/// One backward step: the lambda equation is solved first with eta lagged,
/// then the eta equation with the new lambda, repeated until the increment
/// drops below settings.tol.
AdjointStepResult step_adjoint(const Field2D& lambda_next, const Field2D& eta_next, const AdjointStepData& data,
                               const ModelParams& params, const CostWeights& weights, double tau, FluxScheme scheme,
                               const AdjointSettings& settings);

/// Full backward sweep. Internally marches forward in the reversed time
/// s = T - t and flips the result.
AdjointTrajectory solve_adjoint(const StateTrajectory& state, const ControlField& control, const Targets& targets,
                                const ModelParams& params, const CostWeights& weights,
                                const AdjointSettings& settings = {});

/// Solution (U, V) of the forward system linearized at `state` in the
/// control direction `direction`, levels 0..steps with U[0] = V[0] = 0.
struct TangentTrajectory {
    std::vector<Field2D> du;
    std::vector<Field2D> dv;
};

TangentTrajectory solve_tangent(const StateTrajectory& state, const ControlField& control,
                                const ControlField& direction, const ModelParams& params,
                                const AdjointSettings& settings = {});

} // namespace ksopt
