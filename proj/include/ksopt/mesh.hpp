#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ksopt/error.hpp"

/**
 * @file mesh.hpp
 * @brief Cell-centered uniform grids on a rectangle, scalar fields on them,
 *        and the finite-volume operators shared by every solver.
 *
 * Cell (i, j) has center ((i + 0.5) hx, (j + 0.5) hy) and is stored at
 * index j * nx + i. All boundary faces carry zero flux (homogeneous Neumann
 * conditions realized by mirrored ghost cells).
 */

namespace ksopt {

struct GridSpec {
    double lx = 1.0;
    double ly = 1.0;
    int nx = 2;
    int ny = 2;

    GridSpec() = default;
    /// Throws PreconditionError unless nx, ny >= 2 and lx, ly > 0.
    GridSpec(double lx, double ly, int nx, int ny);

    double hx() const noexcept { return lx / nx; }
    double hy() const noexcept { return ly / ny; }
    double cell_area() const noexcept { return hx() * hy(); }
    double area() const noexcept { return lx * ly; }
    std::size_t cells() const noexcept { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    std::size_t index(int i, int j) const noexcept { return static_cast<std::size_t>(j) * nx + i; }
    double x_center(int i) const noexcept { return (i + 0.5) * hx(); }
    double y_center(int j) const noexcept { return (j + 0.5) * hy(); }

    bool operator==(const GridSpec&) const = default;
};

/// Scalar field, one value per cell, row-major.
class Field2D {
public:
    Field2D() = default;
    explicit Field2D(const GridSpec& grid, double value = 0.0);
    Field2D(const GridSpec& grid, std::vector<double> values);

    /// Samples fn(x, y) at every cell center.
    template <typename Fn>
    static Field2D from_function(const GridSpec& grid, Fn&& fn)
    {
        Field2D out(grid);
        for (int j = 0; j < grid.ny; ++j) {
            for (int i = 0; i < grid.nx; ++i) {
                out.values_[grid.index(i, j)] = fn(grid.x_center(i), grid.y_center(j));
            }
        }
        return out;
    }

    const GridSpec& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }

    double& operator()(int i, int j) noexcept { return values_[grid_.index(i, j)]; }
    double operator()(int i, int j) const noexcept { return values_[grid_.index(i, j)]; }
    double& operator[](std::size_t k) noexcept { return values_[k]; }
    double operator[](std::size_t k) const noexcept { return values_[k]; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    Field2D& operator+=(const Field2D& other);
    Field2D& operator-=(const Field2D& other);
    Field2D& operator*=(double s) noexcept;
    /// this += a * x
    Field2D& axpy(double a, const Field2D& x);

    bool all_finite() const noexcept;
    double min() const noexcept;
    double max() const noexcept;

    /// Cellwise max(value, 0).
    Field2D positive_part() const;

    friend Field2D operator+(Field2D a, const Field2D& b) { return a += b; }
    friend Field2D operator-(Field2D a, const Field2D& b) { return a -= b; }
    friend Field2D operator*(double s, Field2D a) { return a *= s; }

    bool operator==(const Field2D&) const = default;

private:
    GridSpec grid_;
    std::vector<double> values_;
};

/// Boolean per cell; marks the control region.
class RegionMask {
public:
    RegionMask() = default;
    RegionMask(const GridSpec& grid, std::vector<std::uint8_t> inside);

    /// Cells whose centers lie in [x0, x1] x [y0, y1].
    static RegionMask rectangle(const GridSpec& grid, double x0, double y0, double x1, double y1);
    static RegionMask whole(const GridSpec& grid);

    const GridSpec& grid() const noexcept { return grid_; }
    bool contains(std::size_t k) const noexcept { return inside_[k] != 0; }
    /// Indices of the cells inside the region, increasing.
    const std::vector<std::size_t>& cells() const noexcept { return cells_; }
    std::size_t count() const noexcept { return cells_.size(); }
    double area() const noexcept { return static_cast<double>(cells_.size()) * grid_.cell_area(); }

    bool operator==(const RegionMask& other) const { return grid_ == other.grid_ && inside_ == other.inside_; }

private:
    GridSpec grid_;
    std::vector<std::uint8_t> inside_;
    std::vector<std::size_t> cells_;
};

enum class FluxScheme { central, upwind };

/// Values of a density on the interior faces of a grid. Face (i+1/2, j) of
/// the x-family is stored at j * (nx - 1) + i, face (i, j+1/2) of the
/// y-family at j * nx + i.
struct FaceField {
    std::vector<double> x_faces;
    std::vector<double> y_faces;
};

void require_same_grid(const Field2D& a, const Field2D& b, const char* what);

/// Discrete Laplacian with zero normal flux on the boundary.
Field2D laplacian_neumann(const Field2D& field);

/// Conservative discretization of div(density * grad(potential)).
///
/// Coefficients such as the chemotactic sensitivity are folded into the
/// potential by the caller, so the upwind direction follows the sign of the
/// actual transport velocity grad(potential).
Field2D chemotaxis_divergence(const Field2D& density, const Field2D& potential, FluxScheme scheme);

/// Face values of `density` as used by chemotaxis_divergence.
FaceField face_density(const Field2D& density, const Field2D& potential, FluxScheme scheme);

/// div(w grad(potential)) for given face coefficients w. Symmetric in the
/// potential for fixed w.
Field2D weighted_divergence(const FaceField& coefficients, const Field2D& potential);

/// Transpose of the linear map density -> chemotaxis_divergence(density,
/// potential, scheme) (face selection frozen at `potential`), applied to
/// `multiplier`. Approximates -grad(potential) . grad(multiplier).
Field2D chemotaxis_density_transpose(const Field2D& potential, const Field2D& multiplier, FluxScheme scheme);

double integrate(const Field2D& field);
/// Quadrature-weighted inner product sum(a * b) * hx * hy.
double inner(const Field2D& a, const Field2D& b);

struct Norms {
    double l2 = 0.0;
    double lp = 0.0;
    double h1_seminorm = 0.0;
    double linf = 0.0;
};

/// Discrete L2, Lp (p in (1, inf)), H1-seminorm (from face differences)
/// and max norms.
Norms norms(const Field2D& field, double p = 2.0);

} // namespace ksopt
