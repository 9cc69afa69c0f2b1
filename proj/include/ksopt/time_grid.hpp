#pragma once

#include <cmath>
#include <string>

#include "ksopt/error.hpp"

namespace ksopt {

/// Uniform partition of (0, T) into `steps` intervals of length tau.
struct TimeGrid {
    double final_time = 1.0;
    int steps = 1;

    TimeGrid() = default;
    TimeGrid(double final_time_, int steps_) : final_time(final_time_), steps(steps_)
    {
        if (!(final_time > 0.0) || !std::isfinite(final_time)) {
            throw PreconditionError("final time must be positive");
        }
        if (steps < 1) throw PreconditionError("time grid needs at least one step, got " + std::to_string(steps));
    }

    double tau() const noexcept { return final_time / steps; }
    double time(int level) const noexcept { return level * tau(); }
    int levels() const noexcept { return steps + 1; }

    bool operator==(const TimeGrid&) const = default;
};

} // namespace ksopt
