#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ksopt/forward.hpp"
#include "ksopt/optimize.hpp"

/**
 * @file verify.hpp
 * @brief Independent oracles and invariant monitors.
 *
 * Nothing here feeds back into the solvers: every check consumes solver
 * output (trajectories, objective values) and compares it with an
 * independently computed reference.
 */

namespace ksopt {

// ---------------------------------------------------------------------------
// Invariant monitors
// ---------------------------------------------------------------------------

struct InvariantTolerances {
    double nonnegativity = 1e-12;  ///< allowed undershoot below zero
    double mass_identity = 1e-12;  ///< relative to max(1, mass)
    double mass_bound_slack = 10.0; ///< bound is multiplied by (1 + slack * tau)
};

/// Quantities of one time level. Level 0 has no step, so its identity
/// residual is zero.
struct InvariantRecord {
    int level = 0;
    double time = 0.0;
    double min_u = 0.0;
    double min_v = 0.0;
    double mass_u = 0.0;
    double mass_bound_rhs = 0.0;
    double mass_identity_residual = 0.0; ///< relative, see InvariantTolerances
    double l2_u = 0.0;
    double h1_v_proxy = 0.0; ///< face-difference H1 seminorm of v
    double h2_v_proxy = 0.0; ///< discrete L2 norm of Lap_h v
    int picard_iters = 0;
};

struct InvariantCheck {
    std::string name;
    bool hard = false; ///< a failure is a verification failure, not just a report
    bool pass = true;
    double worst = 0.0;
    double tolerance = 0.0;
};

struct InvariantReport {
    std::vector<InvariantRecord> records;
    std::vector<InvariantCheck> checks;

    bool hard_checks_pass() const;
    const InvariantCheck& check(const std::string& name) const;
};

/// Evaluates the monitored quantities at every level. Nonnegativity is hard
/// when the trajectory used the upwind scheme and the control is nonnegative
/// (pass control = nullptr for "no control"); otherwise it is only reported.
/// The mass bound is hard whenever the trajectory is nonnegative.
InvariantReport monitor_invariants(const StateTrajectory& state, const ModelParams& params,
                                   const InvariantTolerances& tolerances = {}, const ControlField* control = nullptr);

/// Header: level,time,min_u,min_v,mass_u,mass_bound_rhs,mass_identity_residual,l2_u,h1_v,h2_v,picard_iters
void write_csv(std::ostream& out, const InvariantReport& report);

// ---------------------------------------------------------------------------
// Finite-difference gradient oracle
// ---------------------------------------------------------------------------

/// Central differences (J(f + eps F) - J(f - eps F)) / (2 eps) for every
/// direction F. Directions are processed on up to `threads` threads; the
/// result does not depend on the thread count.
std::vector<double> fd_gradient(const Problem& problem, const ControlField& f,
                                const std::vector<ControlField>& directions, double eps, int threads = 1);

/// Finite-difference gradient assembled one degree of freedom at a time,
/// scaled to the L2(Q_c) representative (divided by hx hy tau).
GradientField fd_gradient_field(const Problem& problem, const ControlField& f, double eps, int threads = 1);

/// Directions with iid standard normal entries, normalized to unit
/// L2(Q_c) norm.
std::vector<ControlField> random_directions(const ControlField& layout, int count, std::uint64_t seed);

/// L2(Q_c) cosine similarity of two gradient fields.
double cosine_similarity(const ControlField& a, const ControlField& b);

struct GradientCheckRow {
    int direction = 0;
    double adjoint = 0.0;
    double finite_difference = 0.0;
    double relative_error = 0.0;
};

/// Compares <reduced_gradient, F> with fd_gradient for each direction.
std::vector<GradientCheckRow> gradient_check(const Problem& problem, const ControlField& f,
                                             const std::vector<ControlField>& directions, double eps,
                                             int threads = 1);

/// Header: direction,adjoint,finite_difference,relative_error
void write_csv(std::ostream& out, const std::vector<GradientCheckRow>& rows);

/// Discrete duality check: the derivative of the objective along F obtained
/// from the linearized forward solution (U, V) versus <reduced_gradient, F>.
struct DualityResult {
    double tangent_derivative = 0.0;
    double adjoint_derivative = 0.0;
    double relative_error = 0.0;
};

DualityResult duality_check(const Problem& problem, const ControlField& f, const ControlField& direction);

// ---------------------------------------------------------------------------
// Continuous dependence on the control
// ---------------------------------------------------------------------------

struct PerturbationStudy {
    std::vector<double> deltas;
    std::vector<double> differences; ///< ||u(f) - u(f + delta g)||_{L2(Q),h}
    double slope = 0.0;              ///< least-squares log-log slope
};

PerturbationStudy perturbation_study(const Field2D& u0, const Field2D& v0, const ControlField& f,
                                     const ControlField& g, const ModelParams& params,
                                     const ForwardSettings& settings, const std::vector<double>& deltas);

/// Discrete L2(Q) distance sqrt(sum_{n>=1} tau ||a_n - b_n||^2).
double space_time_distance(const std::vector<Field2D>& a, const std::vector<Field2D>& b, double tau);

// ---------------------------------------------------------------------------
// Analytic references
// ---------------------------------------------------------------------------

/// Solution of u' = r u - mu u^2, u(0) = u0.
double logistic_closed_form(double u0, double r, double mu, double t);

/// Decay rate of the Neumann mode cos(kx pi x / lx) cos(ky pi y / ly) under
/// v_t - Lap v + v = 0.
double neumann_mode_decay_rate(double lx, double ly, int kx, int ky);

struct ReferenceCheck {
    std::string name;
    double observed = 0.0;
    double expected = 0.0;
    double error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Logistic solve (u0 = 0.1, r = 1, mu = 2) on a constant field, state at T.
struct LogisticRun {
    std::vector<double> times;
    std::vector<double> values; ///< spatial mean of u per level
    double spatial_spread = 0.0; ///< max over levels of max(u) - min(u)
};

LogisticRun run_logistic(double u0, double r, double mu, double final_time, int steps, int n = 8);

/// Observed decay rate of cos(kx pi x / lx) under repeated step_v with zero
/// sources: -ln(a(T) / a(0)) / T where a is the modal amplitude.
double observed_heat_decay_rate(const GridSpec& grid, int kx, double final_time, int steps);

/// (a) logistic equilibrium, (b) Neumann heat-mode decay, (c) zero fixture.
std::vector<ReferenceCheck> analytic_references();

// ---------------------------------------------------------------------------
// Manufactured solutions
// ---------------------------------------------------------------------------

enum class MmsStudy { spatial, temporal };

struct MmsOptions {
    MmsStudy study = MmsStudy::spatial;
    FluxScheme scheme = FluxScheme::central;
    double kappa = 1.0;
    double r = 1.0;
    double mu = 1.0;
    double final_time = 0.5;
    int base_cells = 8;  ///< cells per axis on the coarsest level
    int base_steps = 4;  ///< time steps on the coarsest level
    int fixed_cells = 64; ///< temporal study: cells per axis on every level
};

struct ConvergenceRow {
    double h = 0.0;
    double tau = 0.0;
    double error_u = 0.0;
    double error_v = 0.0;
    double order_u = 0.0; ///< 0 on the first row
    double order_v = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows; ///< coarsest first
};

/// Spatial study: h halves and tau quarters per level. Temporal study: h
/// fixed, tau halves per level. levels >= 3.
ConvergenceTable mms_convergence(int levels, const MmsOptions& options = {});

/// Header: h,tau,error_u,error_v,order_u,order_v
void write_csv(std::ostream& out, const ConvergenceTable& table);

} // namespace ksopt
