#pragma once

#include <string>
#include <vector>

#include "ksopt/adjoint.hpp"
#include "ksopt/control.hpp"
#include "ksopt/forward.hpp"
#include "ksopt/objective.hpp"

namespace ksopt {

struct CostBreakdown {
    double j_total = 0.0;
    double j_u = 0.0;
    double j_v = 0.0;
    double j_f = 0.0;
};

/// Tracking terms use the trapezoid rule in time and cell quadrature in
/// space; the control term is control_cost.
CostBreakdown evaluate_cost(const StateTrajectory& state, const ControlField& f, const Targets& targets,
                            const CostWeights& weights, double p);

/// Everything that defines one instance of the control problem.
struct Problem {
    Field2D u0;
    Field2D v0;
    Targets targets;
    ModelParams params;
    CostWeights weights;
    AdmissibleSet set;
    TimeGrid time_grid;
    RegionMask region;
    ForwardSettings forward;
    AdjointSettings adjoint;

    /// Checks every housed invariant, including the existence hypothesis
    /// (gamma_f > 0 or a bounded admissible set).
    void validate() const;
    ControlField zero_control() const { return ControlField(time_grid, region); }
};

struct Evaluation {
    StateTrajectory state;
    CostBreakdown cost;
};

Evaluation evaluate(const Problem& problem, const ControlField& f);

struct GradientEvaluation {
    Evaluation evaluation;
    AdjointTrajectory adjoint;
    GradientField gradient;
};

/// Forward solve, adjoint solve and reduced gradient at f.
GradientEvaluation evaluate_gradient(const Problem& problem, const ControlField& f);

struct ArmijoSettings {
    double c1 = 1e-4;
    double shrink = 0.5;
    double s0 = 1.0;
    int max_backtracks = 40;
};

struct OptimizeOptions {
    int max_iters = 200;
    double vi_tol = 1e-6;
    ArmijoSettings armijo;

    void validate() const;
};

struct IterateRecord {
    int iteration = 0;
    CostBreakdown cost;
    double vi_residual = 0.0;
    double step = 0.0; ///< accepted step; 0 for the initial iterate
    int backtracks = 0;
};

enum class StopReason { vi_tol, max_iters, line_search_failure };

std::string to_string(StopReason reason);

struct OptimizeReport {
    std::vector<IterateRecord> iterates;
    ControlField control; ///< final (best) iterate
    bool converged = false;
    StopReason reason = StopReason::max_iters;
};

/// Projected gradient with Armijo backtracking,
///   f <- project(f - s d),  J(trial) <= J(f) - c1 s ||(f - trial) / s||^2.
/// The vi residual is measured with step armijo.s0. A trial whose forward
/// solve fails counts as a rejected backtrack.
OptimizeReport solve(const Problem& problem, const ControlField& f0, const OptimizeOptions& options);

/// Runs solve from every start and returns the report with the lowest final
/// objective (ties: earliest start).
OptimizeReport solve_multistart(const Problem& problem, const std::vector<ControlField>& starts,
                                const OptimizeOptions& options);

struct KktReport {
    double vi_residual = 0.0;
    /// max over region cells of |gamma_f sgn(f)|f|^(p-1) + v eta|; the
    /// pointwise stationarity measure of the unconstrained problem.
    double pointwise_max_violation = 0.0;
};

KktReport kkt_report(const ControlField& f, const StateTrajectory& state, const AdjointTrajectory& adj,
                     const AdmissibleSet& set, const CostWeights& weights, double p, double step = 1.0);

} // namespace ksopt
