#include "ksopt/control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ksopt/objective.hpp"

namespace ksopt {

void CostWeights::validate(const AdmissibleSet& set) const
{
    if (!(gamma_u >= 0.0) || !(gamma_v >= 0.0) || !(gamma_f >= 0.0)) {
        throw PreconditionError("cost weights must be nonnegative");
    }
    if (gamma_f == 0.0 && !set.bounded()) {
        throw PreconditionError(
            "cost.gamma_f = 0 requires a bounded admissible set (control.kind = box); otherwise a minimizer "
            "need not exist");
    }
}

Targets Targets::constant(Field2D u_d, Field2D v_d)
{
    require_same_grid(u_d, v_d, "Targets::constant");
    Targets t;
    t.u_.push_back(std::move(u_d));
    t.v_.push_back(std::move(v_d));
    return t;
}

Targets Targets::trajectory(std::vector<Field2D> u_d, std::vector<Field2D> v_d)
{
    if (u_d.empty() || u_d.size() != v_d.size()) {
        throw PreconditionError("target trajectories must be nonempty and of equal length");
    }
    Targets t;
    t.u_ = std::move(u_d);
    t.v_ = std::move(v_d);
    return t;
}

void Targets::check(const GridSpec& grid, const TimeGrid& time_grid) const
{
    if (u_.empty()) throw PreconditionError("targets are empty");
    if (u_.size() != 1 && static_cast<int>(u_.size()) != time_grid.levels()) {
        throw PreconditionError("target trajectory has " + std::to_string(u_.size()) + " levels, expected " +
                                std::to_string(time_grid.levels()));
    }
    for (std::size_t k = 0; k < u_.size(); ++k) {
        if (!(u_[k].grid() == grid) || !(v_[k].grid() == grid)) throw GridMismatch("targets live on another grid");
    }
}

double signed_power(double x, double p) noexcept
{
    if (x == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(x), p - 1.0), x);
}

double control_cost(const ControlField& f, double gamma_f, double p)
{
    double s = 0.0;
    for (double x : f.values()) s += std::pow(std::abs(x), p);
    return gamma_f / p * s * f.grid().cell_area() * f.time_grid().tau();
}

GradientField reduced_gradient(const ControlField& f, const StateTrajectory& state, const AdjointTrajectory& adj,
                               double gamma_f, double p)
{
    if (!(f.time_grid() == state.time_grid) || !(f.time_grid() == adj.time_grid)) {
        throw GridMismatch("reduced_gradient: time grids differ");
    }
    if (!(f.grid() == state.grid()) || adj.eta.empty() || !(adj.eta.front().grid() == f.grid())) {
        throw GridMismatch("reduced_gradient: spatial grids differ");
    }
    GradientField d(f.time_grid(), f.region());
    const auto& cells = f.region().cells();
    for (int n = 0; n < f.levels(); ++n) {
        const Field2D& v = state.v[n + 1];
        const Field2D& eta = adj.eta[n];
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::size_t k = cells[c];
            d.at(n, c) = gamma_f * signed_power(f.at(n, c), p) + std::max(v[k], 0.0) * eta[k];
        }
    }
    return d;
}

void project_in_place(ControlField& f, const AdmissibleSet& set)
{
    if (set.kind == AdmissibleSet::Kind::unconstrained) return;
    for (auto& x : f.values()) x = std::clamp(x, set.f_min, set.f_max);
}

ControlField project(const ControlField& f, const AdmissibleSet& set)
{
    ControlField out(f);
    project_in_place(out, set);
    return out;
}

double vi_residual(const ControlField& f, const GradientField& d, const AdmissibleSet& set, double step)
{
    if (!(step > 0.0)) throw PreconditionError("vi_residual: step must be positive");
    ControlField trial(f);
    trial.axpy(-step, d);
    project_in_place(trial, set);
    return (f - trial).l2_norm();
}

} // namespace ksopt
