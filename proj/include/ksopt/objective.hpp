#pragma once

#include <vector>

#include "ksopt/control_field.hpp"
#include "ksopt/mesh.hpp"
#include "ksopt/time_grid.hpp"

namespace ksopt {

/// Weights of the tracking and control terms of the objective.
struct CostWeights {
    double gamma_u = 0.0;
    double gamma_v = 0.0;
    double gamma_f = 0.0;

    /// Nonnegativity, plus the existence hypothesis: gamma_f == 0 is only
    /// allowed on a bounded admissible set.
    void validate(const AdmissibleSet& set) const;
};

/// Desired states (u_d, v_d), either static (one field, held constant in
/// time) or one field per time level.
class Targets {
public:
    Targets() = default;
    static Targets constant(Field2D u_d, Field2D v_d);
    static Targets trajectory(std::vector<Field2D> u_d, std::vector<Field2D> v_d);

    const Field2D& u_at(int level) const { return u_.size() == 1 ? u_.front() : u_.at(level); }
    const Field2D& v_at(int level) const { return v_.size() == 1 ? v_.front() : v_.at(level); }
    bool is_static() const noexcept { return u_.size() == 1; }
    /// Throws unless the targets cover levels 0..time_grid.steps on `grid`.
    void check(const GridSpec& grid, const TimeGrid& time_grid) const;

private:
    std::vector<Field2D> u_;
    std::vector<Field2D> v_;
};

/// Trapezoid weight of time level n (1/2 at both ends, 1 inside).
inline double trapezoid_weight(int level, int steps) noexcept
{
    return (level == 0 || level == steps) ? 0.5 : 1.0;
}

} // namespace ksopt
