#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ksopt/control.hpp"
#include "ksopt/objective.hpp"

using namespace ksopt;

namespace {

const GridSpec grid(1.0, 1.0, 10, 10);
const TimeGrid time_grid(2.0, 8);
const RegionMask region = RegionMask::rectangle(grid, 0.25, 0.25, 0.75, 0.75);

ControlField random_control(unsigned seed, double lo = -1.0, double hi = 1.0)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    ControlField f(time_grid, region);
    for (auto& x : f.values()) x = dist(rng);
    return f;
}

ControlField constant_control(double c)
{
    ControlField f(time_grid, region);
    for (auto& x : f.values()) x = c;
    return f;
}

} // namespace

TEST(ControlField, LayoutAndLevelField)
{
    EXPECT_EQ(region.count(), 36u); // centers 0.25, 0.35, ..., 0.75 on each axis
    const ControlField f = random_control(1);
    EXPECT_EQ(f.values().size(), 36u * 8u);
    const Field2D level = f.level_field(3);
    for (std::size_t k = 0; k < grid.cells(); ++k) {
        if (!region.contains(k)) {
            EXPECT_EQ(level[k], 0.0);
        }
    }
    EXPECT_EQ(level[region.cells()[4]], f.at(3, 4));
}

TEST(ControlField, MismatchedLayoutsThrow)
{
    ControlField a(time_grid, region);
    const ControlField b(TimeGrid(2.0, 9), region);
    EXPECT_THROW(a.axpy(1.0, b), GridMismatch);
}

TEST(ControlCost, Examples)
{
    const double p = 2.1;
    EXPECT_EQ(control_cost(constant_control(0.0), 1.0, p), 0.0);
    // Integrand 1 and gamma_f = p: the cost is the measure of Q_c.
    EXPECT_NEAR(control_cost(constant_control(1.0), p, p), region.area() * time_grid.final_time, 1e-13);

    const ControlField f = random_control(2);
    ControlField scaled = f;
    scaled *= -1.7;
    EXPECT_NEAR(control_cost(scaled, 0.3, p), std::pow(1.7, p) * control_cost(f, 0.3, p),
                1e-13 * control_cost(scaled, 0.3, p));
}

TEST(ControlCost, GateauxDerivativeIsSignedPower)
{
    const double p = 2.4;
    const double gamma = 0.7;
    // Entries bounded away from zero to avoid the kink of |f|^(p-1).
    ControlField f = random_control(3, 0.2, 1.0);
    for (std::size_t k = 0; k < f.values().size(); k += 2) f.values()[k] *= -1.0;
    const ControlField dir = random_control(4);

    ControlField d(time_grid, region);
    for (std::size_t k = 0; k < d.values().size(); ++k) d.values()[k] = gamma * signed_power(f.values()[k], p);
    const double analytic = d.inner(dir);

    const double eps = 1e-5;
    ControlField plus = f;
    plus.axpy(eps, dir);
    ControlField minus = f;
    minus.axpy(-eps, dir);
    const double fd = (control_cost(plus, gamma, p) - control_cost(minus, gamma, p)) / (2 * eps);
    EXPECT_NEAR(fd, analytic, 1e-6 * std::abs(analytic));
}

TEST(SignedPower, Values)
{
    EXPECT_EQ(signed_power(0.0, 2.1), 0.0);
    EXPECT_NEAR(signed_power(-2.0, 2.5), -std::pow(2.0, 1.5), 1e-15);
    EXPECT_NEAR(signed_power(3.0, 2.0), 3.0, 1e-15);
}

TEST(Project, Examples)
{
    const AdmissibleSet box = AdmissibleSet::box(-1.0, 1.0);
    const ControlField inside = random_control(5, -0.9, 0.9);
    EXPECT_TRUE(project(inside, box) == inside);

    const ControlField clamped = project(constant_control(10.0), box);
    for (double x : clamped.values()) EXPECT_EQ(x, 1.0);

    const ControlField wild = random_control(6, -5.0, 5.0);
    EXPECT_TRUE(project(project(wild, box), box) == project(wild, box));
    EXPECT_TRUE(project(wild, AdmissibleSet::unconstrained()) == wild);
}

TEST(Project, NonExpansive)
{
    const AdmissibleSet box = AdmissibleSet::box(-0.5, 2.0);
    for (unsigned s = 0; s < 20; ++s) {
        const ControlField a = random_control(100 + s, -4.0, 4.0);
        const ControlField b = random_control(200 + s, -4.0, 4.0);
        EXPECT_LE((project(a, box) - project(b, box)).l2_norm(), (a - b).l2_norm() + 1e-15);
    }
}

TEST(AdmissibleSet, EmptyBoxRejected)
{
    EXPECT_THROW(AdmissibleSet::box(1.0, -1.0).validate(), PreconditionError);
}

TEST(ViResidual, Examples)
{
    const ControlField f = random_control(7);
    const ControlField zero(time_grid, region);
    EXPECT_EQ(vi_residual(f, zero, AdmissibleSet::unconstrained(), 1.0), 0.0);

    const ControlField d = random_control(8);
    EXPECT_NEAR(vi_residual(f, d, AdmissibleSet::unconstrained(), 0.5), 0.5 * d.l2_norm(), 1e-15);

    // At the upper bound with d < 0 the projected step stays at f_max.
    const AdmissibleSet box = AdmissibleSet::box(-2.0, 2.0);
    EXPECT_EQ(vi_residual(constant_control(2.0), random_control(9, -1.0, -0.1), box, 1.0), 0.0);
}

TEST(CostWeights, ExistenceHypothesis)
{
    EXPECT_THROW((CostWeights{1.0, 1.0, 0.0}.validate(AdmissibleSet::unconstrained())), PreconditionError);
    EXPECT_NO_THROW((CostWeights{1.0, 1.0, 0.0}.validate(AdmissibleSet::box(-1.0, 1.0))));
    EXPECT_THROW((CostWeights{-1.0, 1.0, 1.0}.validate(AdmissibleSet::unconstrained())), PreconditionError);
}

TEST(ReducedGradient, ComponentsAndConventions)
{
    const TimeGrid tg(1.0, 4);
    StateTrajectory state;
    state.time_grid = tg;
    AdjointTrajectory adj;
    adj.time_grid = tg;
    for (int n = 0; n <= tg.steps; ++n) {
        state.u.emplace_back(grid, 1.0);
        state.v.emplace_back(grid, 1.0 + n);
        adj.lambda.emplace_back(grid, 0.0);
        adj.eta.emplace_back(grid, n < tg.steps ? 0.1 * (n + 1) : 0.0);
    }
    const ControlField zero(tg, region);
    // f = 0, gamma_f = 0: pure adjoint signal v[n+1] * eta[n].
    const GradientField d0 = reduced_gradient(zero, state, adj, 0.0, 2.1);
    for (int n = 0; n < tg.steps; ++n) EXPECT_NEAR(d0.at(n, 0), (2.0 + n) * 0.1 * (n + 1), 1e-15);

    // eta = 0: only the control-cost term.
    for (auto& e : adj.eta) e = Field2D(grid);
    ControlField f(tg, region);
    for (auto& x : f.values()) x = -0.5;
    const GradientField d1 = reduced_gradient(f, state, adj, 2.0, 2.5);
    for (double x : d1.values()) EXPECT_NEAR(x, -2.0 * std::pow(0.5, 1.5), 1e-15);
    EXPECT_EQ(reduced_gradient(zero, state, adj, 2.0, 2.5).max_abs(), 0.0);
}
