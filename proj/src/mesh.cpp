#include "ksopt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ksopt {

GridSpec::GridSpec(double lx_, double ly_, int nx_, int ny_) : lx(lx_), ly(ly_), nx(nx_), ny(ny_)
{
    if (nx < 2 || ny < 2) {
        throw PreconditionError("grid needs at least 2 cells per axis, got " + std::to_string(nx) + "x" +
                                std::to_string(ny));
    }
    if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
        throw PreconditionError("domain side lengths must be positive and finite");
    }
}

Field2D::Field2D(const GridSpec& grid, double value) : grid_(grid), values_(grid.cells(), value) {}

Field2D::Field2D(const GridSpec& grid, std::vector<double> values) : grid_(grid), values_(std::move(values))
{
    if (values_.size() != grid_.cells()) {
        throw PreconditionError("field has " + std::to_string(values_.size()) + " values, grid has " +
                                std::to_string(grid_.cells()) + " cells");
    }
}

void require_same_grid(const Field2D& a, const Field2D& b, const char* what)
{
    if (!(a.grid() == b.grid())) {
        throw GridMismatch(std::string(what) + ": fields live on different grids");
    }
}

Field2D& Field2D::operator+=(const Field2D& other)
{
    require_same_grid(*this, other, "Field2D::operator+=");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
    return *this;
}

Field2D& Field2D::operator-=(const Field2D& other)
{
    require_same_grid(*this, other, "Field2D::operator-=");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
    return *this;
}

Field2D& Field2D::operator*=(double s) noexcept
{
    for (auto& x : values_) x *= s;
    return *this;
}

Field2D& Field2D::axpy(double a, const Field2D& x)
{
    require_same_grid(*this, x, "Field2D::axpy");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += a * x.values_[k];
    return *this;
}

bool Field2D::all_finite() const noexcept
{
    return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

double Field2D::min() const noexcept
{
    return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

double Field2D::max() const noexcept
{
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

Field2D Field2D::positive_part() const
{
    Field2D out(*this);
    for (auto& x : out.values_) x = std::max(x, 0.0);
    return out;
}

RegionMask::RegionMask(const GridSpec& grid, std::vector<std::uint8_t> inside) : grid_(grid), inside_(std::move(inside))
{
    if (inside_.size() != grid_.cells()) {
        throw PreconditionError("region mask size does not match grid");
    }
    for (std::size_t k = 0; k < inside_.size(); ++k) {
        if (inside_[k]) cells_.push_back(k);
    }
}

RegionMask RegionMask::rectangle(const GridSpec& grid, double x0, double y0, double x1, double y1)
{
    std::vector<std::uint8_t> inside(grid.cells(), 0);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const double x = grid.x_center(i);
            const double y = grid.y_center(j);
            inside[grid.index(i, j)] = (x >= x0 && x <= x1 && y >= y0 && y <= y1) ? 1 : 0;
        }
    }
    return RegionMask(grid, std::move(inside));
}

RegionMask RegionMask::whole(const GridSpec& grid)
{
    return RegionMask(grid, std::vector<std::uint8_t>(grid.cells(), 1));
}

Field2D laplacian_neumann(const Field2D& field)
{
    const GridSpec& g = field.grid();
    Field2D out(g);
    const double ihx2 = 1.0 / (g.hx() * g.hx());
    const double ihy2 = 1.0 / (g.hy() * g.hy());
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i + 1 < g.nx; ++i) {
            const double flux = (field(i + 1, j) - field(i, j)) * ihx2;
            out(i, j) += flux;
            out(i + 1, j) -= flux;
        }
    }
    for (int j = 0; j + 1 < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double flux = (field(i, j + 1) - field(i, j)) * ihy2;
            out(i, j) += flux;
            out(i, j + 1) -= flux;
        }
    }
    return out;
}

namespace {

// Weights (lower, upper) of the two neighbouring cells in a face value.
inline std::pair<double, double> face_weights(double gradient, FluxScheme scheme) noexcept
{
    if (scheme == FluxScheme::upwind) {
        if (gradient > 0.0) return {1.0, 0.0};
        if (gradient < 0.0) return {0.0, 1.0};
    }
    return {0.5, 0.5};
}

} // namespace

FaceField face_density(const Field2D& density, const Field2D& potential, FluxScheme scheme)
{
    require_same_grid(density, potential, "face_density");
    const GridSpec& g = density.grid();
    FaceField faces;
    faces.x_faces.resize(static_cast<std::size_t>(g.nx - 1) * g.ny);
    faces.y_faces.resize(static_cast<std::size_t>(g.nx) * (g.ny - 1));
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i + 1 < g.nx; ++i) {
            const auto [a, b] = face_weights(potential(i + 1, j) - potential(i, j), scheme);
            faces.x_faces[static_cast<std::size_t>(j) * (g.nx - 1) + i] = a * density(i, j) + b * density(i + 1, j);
        }
    }
    for (int j = 0; j + 1 < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const auto [a, b] = face_weights(potential(i, j + 1) - potential(i, j), scheme);
            faces.y_faces[static_cast<std::size_t>(j) * g.nx + i] = a * density(i, j) + b * density(i, j + 1);
        }
    }
    return faces;
}

Field2D weighted_divergence(const FaceField& coefficients, const Field2D& potential)
{
    const GridSpec& g = potential.grid();
    if (coefficients.x_faces.size() != static_cast<std::size_t>(g.nx - 1) * g.ny ||
        coefficients.y_faces.size() != static_cast<std::size_t>(g.nx) * (g.ny - 1)) {
        throw GridMismatch("weighted_divergence: face coefficients do not match grid");
    }
    Field2D out(g);
    const double ihx2 = 1.0 / (g.hx() * g.hx());
    const double ihy2 = 1.0 / (g.hy() * g.hy());
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i + 1 < g.nx; ++i) {
            const double w = coefficients.x_faces[static_cast<std::size_t>(j) * (g.nx - 1) + i];
            const double flux = w * ((potential(i + 1, j) - potential(i, j)) * ihx2);
            out(i, j) += flux;
            out(i + 1, j) -= flux;
        }
    }
    for (int j = 0; j + 1 < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double w = coefficients.y_faces[static_cast<std::size_t>(j) * g.nx + i];
            const double flux = w * ((potential(i, j + 1) - potential(i, j)) * ihy2);
            out(i, j) += flux;
            out(i, j + 1) -= flux;
        }
    }
    return out;
}

Field2D chemotaxis_divergence(const Field2D& density, const Field2D& potential, FluxScheme scheme)
{
    return weighted_divergence(face_density(density, potential, scheme), potential);
}

Field2D chemotaxis_density_transpose(const Field2D& potential, const Field2D& multiplier, FluxScheme scheme)
{
    require_same_grid(potential, multiplier, "chemotaxis_density_transpose");
    const GridSpec& g = potential.grid();
    Field2D out(g);
    const double ihx2 = 1.0 / (g.hx() * g.hx());
    const double ihy2 = 1.0 / (g.hy() * g.hy());
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i + 1 < g.nx; ++i) {
            const double grad = potential(i + 1, j) - potential(i, j);
            const auto [a, b] = face_weights(grad, scheme);
            const double c = (grad * ihx2) * (multiplier(i, j) - multiplier(i + 1, j));
            out(i, j) += a * c;
            out(i + 1, j) += b * c;
        }
    }
    for (int j = 0; j + 1 < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double grad = potential(i, j + 1) - potential(i, j);
            const auto [a, b] = face_weights(grad, scheme);
            const double c = (grad * ihy2) * (multiplier(i, j) - multiplier(i, j + 1));
            out(i, j) += a * c;
            out(i, j + 1) += b * c;
        }
    }
    return out;
}

double integrate(const Field2D& field)
{
    double sum = 0.0;
    for (double x : field.values()) sum += x;
    return sum * field.grid().cell_area();
}

double inner(const Field2D& a, const Field2D& b)
{
    require_same_grid(a, b, "inner");
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) sum += a[k] * b[k];
    return sum * a.grid().cell_area();
}

Norms norms(const Field2D& field, double p)
{
    if (!(p > 1.0) || !std::isfinite(p)) {
        throw PreconditionError("norms: exponent p must lie in (1, inf), got " + std::to_string(p));
    }
    const GridSpec& g = field.grid();
    const double area = g.cell_area();
    Norms n;
    double sq = 0.0;
    double pw = 0.0;
    for (double x : field.values()) {
        sq += x * x;
        pw += std::pow(std::abs(x), p);
        n.linf = std::max(n.linf, std::abs(x));
    }
    n.l2 = std::sqrt(sq * area);
    n.lp = std::pow(pw * area, 1.0 / p);

    double grad = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i + 1 < g.nx; ++i) {
            const double d = (field(i + 1, j) - field(i, j)) / g.hx();
            grad += d * d;
        }
    }
    for (int j = 0; j + 1 < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double d = (field(i, j + 1) - field(i, j)) / g.hy();
            grad += d * d;
        }
    }
    n.h1_seminorm = std::sqrt(grad * area);
    return n;
}

} // namespace ksopt
