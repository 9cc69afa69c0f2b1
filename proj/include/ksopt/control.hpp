#pragma once

#include "ksopt/adjoint.hpp"
#include "ksopt/control_field.hpp"
#include "ksopt/forward.hpp"

namespace ksopt {

/// Same layout as ControlField; holds the L2(Q_c) representative of the
/// derivative of the reduced objective.
using GradientField = ControlField;

/// sgn(x) |x|^(p-1), continuous at 0 for p > 1.
double signed_power(double x, double p) noexcept;

/// (gamma_f / p) * sum_n sum_cells |f|^p hx hy tau.
double control_cost(const ControlField& f, double gamma_f, double p);

/// d = gamma_f sgn(f)|f|^(p-1) + v_+ * eta on the region. Level n pairs the
/// control f[n] with eta[n] and the state v[n+1] it produced.
GradientField reduced_gradient(const ControlField& f, const StateTrajectory& state, const AdjointTrajectory& adj,
                               double gamma_f, double p);

/// Cellwise clamp to the box, identity when unconstrained.
ControlField project(const ControlField& f, const AdmissibleSet& set);
void project_in_place(ControlField& f, const AdmissibleSet& set);

/// ||f - project(f - step * d)||_{L2(Q_c)}; zero iff f satisfies the discrete
/// variational inequality.
double vi_residual(const ControlField& f, const GradientField& d, const AdmissibleSet& set, double step);

} // namespace ksopt
