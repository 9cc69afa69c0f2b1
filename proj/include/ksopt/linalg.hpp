#pragma once

#include <span>
#include <vector>

#include "ksopt/mesh.hpp"

namespace ksopt {

struct CgSettings {
    double rel_tol = 1e-10;
    int max_iters = 5000;
};

struct CgResult {
    int iterations = 0;
    double relative_residual = 0.0;
};

// A = shift * I - Laplacian_h + diag(reaction); SPD whenever
// shift + reaction > 0 cellwise.
class ShiftedLaplacian {
public:
    ShiftedLaplacian(const GridSpec& grid, double shift, std::vector<double> reaction = {});

    const GridSpec& grid() const noexcept { return grid_; }
    void apply(std::span<const double> x, std::span<double> out) const;
    std::vector<double> diagonal() const;
    /// Sum over all cells of (A x); the column sums of -Laplacian_h vanish.
    double total(std::span<const double> x) const;

private:
    GridSpec grid_;
    double shift_;
    std::vector<double> reaction_;
};

/// Jacobi-preconditioned conjugate gradient. `x` holds the initial guess on
/// entry. Throws SolverError when rel_tol is not reached.
CgResult conjugate_gradient(const ShiftedLaplacian& op, std::span<const double> rhs, std::span<double> x,
                            const CgSettings& settings);

/// Convenience wrapper on fields.
Field2D solve_shifted_laplacian(const ShiftedLaplacian& op, const Field2D& rhs, const Field2D& guess,
                                const CgSettings& settings, CgResult* result = nullptr);

} // namespace ksopt
