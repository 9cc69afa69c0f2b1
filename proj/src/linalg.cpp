#include "ksopt/linalg.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace ksopt {

namespace {

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

} // namespace

ShiftedLaplacian::ShiftedLaplacian(const GridSpec& grid, double shift, std::vector<double> reaction)
    : grid_(grid), shift_(shift), reaction_(std::move(reaction))
{
    if (!reaction_.empty() && reaction_.size() != grid_.cells()) {
        throw GridMismatch("ShiftedLaplacian: reaction size does not match grid");
    }
}

void ShiftedLaplacian::apply(std::span<const double> x, std::span<double> out) const
{
    const int nx = grid_.nx;
    const int ny = grid_.ny;
    const double ihx2 = 1.0 / (grid_.hx() * grid_.hx());
    const double ihy2 = 1.0 / (grid_.hy() * grid_.hy());
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const std::size_t k = grid_.index(i, j);
            const double c = x[k];
            double lap = 0.0;
            if (i > 0) lap += (c - x[k - 1]) * ihx2;
            if (i + 1 < nx) lap += (c - x[k + 1]) * ihx2;
            if (j > 0) lap += (c - x[k - nx]) * ihy2;
            if (j + 1 < ny) lap += (c - x[k + nx]) * ihy2;
            double v = shift_ * c + lap;
            if (!reaction_.empty()) v += reaction_[k] * c;
            out[k] = v;
        }
    }
}

std::vector<double> ShiftedLaplacian::diagonal() const
{
    std::vector<double> d(grid_.cells());
    const double ihx2 = 1.0 / (grid_.hx() * grid_.hx());
    const double ihy2 = 1.0 / (grid_.hy() * grid_.hy());
    for (int j = 0; j < grid_.ny; ++j) {
        for (int i = 0; i < grid_.nx; ++i) {
            const std::size_t k = grid_.index(i, j);
            double v = shift_;
            v += ((i > 0) + (i + 1 < grid_.nx)) * ihx2;
            v += ((j > 0) + (j + 1 < grid_.ny)) * ihy2;
            if (!reaction_.empty()) v += reaction_[k];
            d[k] = v;
        }
    }
    return d;
}

double ShiftedLaplacian::total(std::span<const double> x) const
{
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        s += (shift_ + (reaction_.empty() ? 0.0 : reaction_[k])) * x[k];
    }
    return s;
}

CgResult conjugate_gradient(const ShiftedLaplacian& op, std::span<const double> rhs, std::span<double> x,
                            const CgSettings& settings)
{
    const std::size_t n = rhs.size();
    const auto diag = op.diagonal();
    std::vector<double> r(n), z(n), p(n), q(n);

    op.apply(x, q);
    for (std::size_t k = 0; k < n; ++k) r[k] = rhs[k] - q[k];

    const double bnorm = std::sqrt(dot(rhs, rhs));
    CgResult result;
    if (bnorm == 0.0) {
        // The operator is nonsingular, so the solution is zero.
        std::fill(x.begin(), x.end(), 0.0);
        return result;
    }
    const double target = settings.rel_tol * bnorm;
    double rnorm = std::sqrt(dot(r, r));
    if (rnorm <= target) {
        result.relative_residual = rnorm / bnorm;
        return result;
    }

    for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / diag[k];
    p = z;
    double rz = dot(r, z);

    for (int it = 1; it <= settings.max_iters; ++it) {
        op.apply(p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0)) {
            throw SolverError("conjugate gradient: operator not positive definite", rnorm / bnorm);
        }
        const double alpha = rz / pq;
        for (std::size_t k = 0; k < n; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * q[k];
        }
        rnorm = std::sqrt(dot(r, r));
        if (rnorm <= target) {
            result.iterations = it;
            result.relative_residual = rnorm / bnorm;
            return result;
        }
        for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / diag[k];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    }
    throw SolverError("conjugate gradient did not converge in " + std::to_string(settings.max_iters) +
                          " iterations (relative residual " + std::to_string(rnorm / bnorm) + ")",
                      rnorm / bnorm);
}

Field2D solve_shifted_laplacian(const ShiftedLaplacian& op, const Field2D& rhs, const Field2D& guess,
                                const CgSettings& settings, CgResult* result)
{
    require_same_grid(rhs, guess, "solve_shifted_laplacian");
    if (!(rhs.grid() == op.grid())) throw GridMismatch("solve_shifted_laplacian: operator grid differs");
    Field2D x(guess);
    const CgResult res = conjugate_gradient(op, rhs.values(), x.values(), settings);
    if (result) *result = res;
    return x;
}

} // namespace ksopt
