#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ksopt/mesh.hpp"
#include "ksopt/time_grid.hpp"

namespace ksopt {

/**
 * Space-time control on the control region, piecewise constant in time.
 *
 * Level n (0 <= n < steps) is the value on the interval (t_n, t_{n+1}); it
 * drives the forward step n -> n+1 and is weighted by tau in every time
 * quadrature (left-endpoint rule). Values outside the region are zero and
 * not stored.
 */
class ControlField {
public:
    ControlField() = default;
    /// Zero control.
    ControlField(const TimeGrid& time_grid, const RegionMask& region);
    ControlField(const TimeGrid& time_grid, const RegionMask& region, std::vector<double> values);

    /// Samples fn(t_n, x, y) at every level and region cell.
    template <typename Fn>
    static ControlField from_function(const TimeGrid& time_grid, const RegionMask& region, Fn&& fn)
    {
        ControlField out(time_grid, region);
        const GridSpec& g = region.grid();
        for (int n = 0; n < time_grid.steps; ++n) {
            for (std::size_t c = 0; c < region.count(); ++c) {
                const std::size_t k = region.cells()[c];
                const int i = static_cast<int>(k % g.nx);
                const int j = static_cast<int>(k / g.nx);
                out.at(n, c) = fn(time_grid.time(n), g.x_center(i), g.y_center(j));
            }
        }
        return out;
    }

    const TimeGrid& time_grid() const noexcept { return time_grid_; }
    const RegionMask& region() const noexcept { return region_; }
    const GridSpec& grid() const noexcept { return region_.grid(); }
    int levels() const noexcept { return time_grid_.steps; }
    std::size_t cells_per_level() const noexcept { return region_.count(); }

    double& at(int level, std::size_t cell) noexcept { return values_[level * region_.count() + cell]; }
    double at(int level, std::size_t cell) const noexcept { return values_[level * region_.count() + cell]; }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> level_values(int level) const noexcept
    {
        return std::span<const double>(values_).subspan(level * region_.count(), region_.count());
    }

    /// f(level) * 1_region as a full-grid field.
    Field2D level_field(int level) const;

    bool same_layout(const ControlField& other) const noexcept
    {
        return time_grid_ == other.time_grid_ && region_ == other.region_;
    }
    void require_same_layout(const ControlField& other, const char* what) const;

    ControlField& axpy(double a, const ControlField& x);
    ControlField& operator*=(double s) noexcept;
    friend ControlField operator-(ControlField a, const ControlField& b) { return a.axpy(-1.0, b); }

    /// L2(Q_c) inner product: sum over levels and region cells of a * b * hx * hy * tau.
    double inner(const ControlField& other) const;
    double l2_norm() const;
    double max_abs() const noexcept;
    bool all_finite() const noexcept;

    bool operator==(const ControlField&) const = default;

private:
    TimeGrid time_grid_;
    RegionMask region_;
    std::vector<double> values_;
};

/// The closed convex set of admissible controls.
struct AdmissibleSet {
    enum class Kind { unconstrained, box };
    Kind kind = Kind::unconstrained;
    double f_min = 0.0;
    double f_max = 0.0;

    static AdmissibleSet unconstrained() { return {}; }
    static AdmissibleSet box(double lo, double hi);

    bool bounded() const noexcept { return kind == Kind::box; }
    void validate() const;
};

} // namespace ksopt
