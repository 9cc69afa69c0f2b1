#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ksopt/error.hpp"
#include "ksopt/optimize.hpp"

/**
 * @file config.hpp
 * @brief Flat `section.key = value` run configuration.
 *
 * One assignment per line, `#` starts a comment, blank lines are ignored.
 * Every key is optional; see README.md for the full key list and defaults.
 *
 * Field-valued keys (init.u0, init.v0, targets.u_d, targets.v_d,
 * targets.f_star, control.initial) take an expression id:
 *
 *   constant(c)
 *   cosine(a, b, kx, ky)            a + b cos(kx pi x / Lx) cos(ky pi y / Ly)
 *   gaussian(a, x0, y0, s[, c])     c + a exp(-((x-x0)^2 + (y-y0)^2) / (2 s^2))
 *   file:<path>                     a snapshot (a directory for control.initial)
 *
 * plus `zero` for control.initial and `manufactured` for targets.u_d (the
 * targets then become the trajectory of forward(targets.f_star)).
 */

namespace ksopt {

class ConfigError : public Error {
public:
    enum class Kind { syntax, unknown_key, type_mismatch, invariant };

    ConfigError(Kind kind, std::string key, const std::string& message);
    Kind kind() const noexcept { return kind_; }
    const std::string& key() const noexcept { return key_; }

private:
    Kind kind_;
    std::string key_;
};

struct FieldExpr {
    enum class Kind { constant, cosine, gaussian, file, zero, manufactured };
    Kind kind = Kind::constant;
    std::vector<double> args{0.0};
    std::filesystem::path path;

    static FieldExpr constant(double c) { return FieldExpr{Kind::constant, {c}, {}}; }
    /// Value at (x, y) on a domain of size lx x ly; not valid for file kinds.
    double evaluate(double x, double y, double lx, double ly) const;
    std::string describe() const;
};

struct RunConfig {
    double lx = 1.0;
    double ly = 1.0;
    int nx = 32;
    int ny = 32;
    double final_time = 1.0;
    int steps = 100;

    ModelParams model;

    /// Control region (x0, y0, x1, y1); unset means the whole domain.
    std::optional<std::vector<double>> region;
    AdmissibleSet set;
    FieldExpr control_initial{FieldExpr::Kind::zero, {}, {}};

    CostWeights weights{1.0, 1.0, 1e-3};

    FieldExpr u_d = FieldExpr::constant(0.0);
    FieldExpr v_d = FieldExpr::constant(0.0);
    FieldExpr f_star = FieldExpr::constant(0.0);

    FieldExpr u0 = FieldExpr::constant(1.0);
    FieldExpr v0 = FieldExpr::constant(1.0);

    ForwardSettings forward;
    AdjointSettings adjoint;

    OptimizeOptions optimizer;
    int starts = 1;

    int gradcheck_directions = 5;
    double gradcheck_eps = 1e-4;

    int mms_levels = 4;

    std::filesystem::path output_directory = "ksopt-out";
    int snapshot_every = 1;

    /// Directory that relative file: paths are resolved against.
    std::filesystem::path base_directory = ".";

    GridSpec grid() const { return GridSpec(lx, ly, nx, ny); }
    TimeGrid time_grid() const { return TimeGrid(final_time, steps); }
};

/// Parses and validates a configuration. Throws ConfigError naming the
/// offending key.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_directory = ".");
RunConfig load_config(const std::filesystem::path& path);

/// Evaluates an expression (or loads a file) on `grid`.
Field2D make_field(const FieldExpr& expr, const GridSpec& grid, const std::filesystem::path& base);

RegionMask make_region(const RunConfig& config);

/// Builds the problem, including manufactured targets when requested.
Problem build_problem(const RunConfig& config);

/// The initial control from control.initial.
ControlField initial_control(const RunConfig& config, const Problem& problem);

/// Control equal to `expr` at every level on the region.
ControlField control_from_expr(const FieldExpr& expr, const Problem& problem, const std::filesystem::path& base);

} // namespace ksopt
