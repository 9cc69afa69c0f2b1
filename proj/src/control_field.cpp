#include "ksopt/control_field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ksopt {

ControlField::ControlField(const TimeGrid& time_grid, const RegionMask& region)
    : time_grid_(time_grid), region_(region),
      values_(static_cast<std::size_t>(time_grid.steps) * region.count(), 0.0)
{
}

ControlField::ControlField(const TimeGrid& time_grid, const RegionMask& region, std::vector<double> values)
    : time_grid_(time_grid), region_(region), values_(std::move(values))
{
    if (values_.size() != static_cast<std::size_t>(time_grid.steps) * region.count()) {
        throw PreconditionError("control has " + std::to_string(values_.size()) + " values, expected " +
                                std::to_string(static_cast<std::size_t>(time_grid.steps) * region.count()));
    }
}

Field2D ControlField::level_field(int level) const
{
    Field2D out(grid());
    const auto vals = level_values(level);
    for (std::size_t c = 0; c < vals.size(); ++c) out[region_.cells()[c]] = vals[c];
    return out;
}

void ControlField::require_same_layout(const ControlField& other, const char* what) const
{
    if (!same_layout(other)) throw GridMismatch(std::string(what) + ": controls have different layouts");
}

ControlField& ControlField::axpy(double a, const ControlField& x)
{
    require_same_layout(x, "ControlField::axpy");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += a * x.values_[k];
    return *this;
}

ControlField& ControlField::operator*=(double s) noexcept
{
    for (auto& x : values_) x *= s;
    return *this;
}

double ControlField::inner(const ControlField& other) const
{
    require_same_layout(other, "ControlField::inner");
    double s = 0.0;
    for (std::size_t k = 0; k < values_.size(); ++k) s += values_[k] * other.values_[k];
    return s * grid().cell_area() * time_grid_.tau();
}

double ControlField::l2_norm() const { return std::sqrt(inner(*this)); }

double ControlField::max_abs() const noexcept
{
    double m = 0.0;
    for (double x : values_) m = std::max(m, std::abs(x));
    return m;
}

bool ControlField::all_finite() const noexcept
{
    return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

AdmissibleSet AdmissibleSet::box(double lo, double hi)
{
    AdmissibleSet s{Kind::box, lo, hi};
    s.validate();
    return s;
}

void AdmissibleSet::validate() const
{
    if (kind == Kind::box && !(f_min <= f_max)) {
        throw PreconditionError("box constraint is empty: f_min > f_max");
    }
}

} // namespace ksopt
