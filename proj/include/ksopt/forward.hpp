#pragma once

#include <functional>
#include <vector>

#include "ksopt/control_field.hpp"
#include "ksopt/linalg.hpp"
#include "ksopt/mesh.hpp"
#include "ksopt/time_grid.hpp"

/**
 * @file forward.hpp
 * @brief Time integration of the controlled Keller-Segel system
 *
 *     u_t - Lap u + kappa div(u grad v) = r u - mu u^2,
 *     v_t - Lap v + v                   = u + f v 1_{Omega_c},
 *
 * with zero-flux boundaries. Each backward-Euler step is solved by a
 * Picard iteration over the decoupled linear problems: given the lagged
 * iterate (u_bar, v_bar), first v and then u are obtained from
 *
 *     (1/tau + 1 - Lap) v = v_prev/tau + u_bar_+ + f v_bar_+ 1_{Omega_c}
 *     (1/tau - Lap + mu u_bar_+) u = u_prev/tau + r u_bar_+ - kappa div(u_bar_+ grad v)
 *
 * At the fixed point this is the fully implicit Euler step of the system
 * with positive parts, which is what the adjoint module differentiates.
 */

namespace ksopt {

struct ModelParams {
    double kappa = 0.0;      ///< chemotactic sensitivity, either sign
    double r = 0.0;          ///< logistic growth rate
    double mu = 1.0;         ///< logistic damping, > 0
    double p_exponent = 2.1; ///< control-cost exponent, in (2, 3)

    void validate() const;
};

struct PicardSettings {
    int max_iters = 50;
    double tol = 1e-9;

    void validate() const;
};

struct ForwardSettings {
    FluxScheme scheme = FluxScheme::central;
    PicardSettings picard;
    CgSettings cg;
};

/// Diagnostics of one accepted step; the lagged integrals make the discrete
/// mass identity recomputable from the trajectory.
struct StepRecord {
    int picard_iters = 0;
    double lagged_mass = 0.0;    ///< integral of u_bar_+ in the final sweep
    double lagged_damping = 0.0; ///< integral of u_bar_+ * u_new in the final sweep
};

struct StateTrajectory {
    TimeGrid time_grid;
    FluxScheme scheme = FluxScheme::central;
    std::vector<Field2D> u; ///< levels 0..steps
    std::vector<Field2D> v;
    std::vector<StepRecord> steps; ///< entry n describes step n -> n+1

    const GridSpec& grid() const { return u.front().grid(); }
};

/// Extra right-hand sides evaluated at the new time level of each step
/// (manufactured-solution studies). Both fields arrive zeroed.
using SourceTerms = std::function<void(double time, Field2D& source_u, Field2D& source_v)>;

/// One linear v-solve. `f_now` is f * 1_{Omega_c} as a full-grid field.
Field2D step_v(const Field2D& v_prev, const Field2D& u_bar, const Field2D& v_bar, const Field2D& f_now, double tau,
               const CgSettings& cg, const Field2D* source = nullptr);

/// One linear u-solve with positive-part lagging. The result satisfies the
/// discrete mass identity
///   int(u_new) - int(u_prev) = tau (r int(u_bar_+) - mu int(u_bar_+ u_new) + int(source))
/// to round-off.
Field2D step_u(const Field2D& u_prev, const Field2D& u_bar, const Field2D& v_new, const ModelParams& params,
               double tau, FluxScheme scheme, const CgSettings& cg, const Field2D* source = nullptr);

struct PicardResult {
    Field2D u;
    Field2D v;
    int iterations = 0;
    double last_increment = 0.0;
    StepRecord record;
};

/// Fixed-point iteration for one time level, starting from (u_prev, v_prev).
/// Throws SolverError carrying the last relative increment when max_iters is
/// exceeded.
PicardResult picard_step(const Field2D& u_prev, const Field2D& v_prev, const Field2D& f_now,
                         const ModelParams& params, double tau, const ForwardSettings& settings,
                         const Field2D* source_u = nullptr, const Field2D* source_v = nullptr);

/// Full forward solve over control.time_grid(). Requires u0, v0 >= 0.
StateTrajectory solve_forward(const Field2D& u0, const Field2D& v0, const ControlField& control,
                              const ModelParams& params, const ForwardSettings& settings,
                              const SourceTerms& sources = {});

} // namespace ksopt
