#pragma once

#include <functional>
#include <string>

namespace wn {

/// Smooth scalar activation together with its first two derivatives and the
/// constants the curvature formulas consume. Required properties:
/// |deriv1| <= 1 everywhere (unit Lipschitz) and |deriv2| <= beta_phi.
struct ActivationSpec {
    std::string name;
    std::function<double(double)> eval;
    std::function<double(double)> deriv1;
    std::function<double(double)> deriv2;
    double phi0 = 0.0;       // eval(0)
    double beta_phi = 0.0;   // sup |deriv2|
    double lipschitz = 1.0;  // sup |deriv1|, must be <= 1

    static ActivationSpec tanh();

    /// Exact erf-based GELU rescaled by its maximum slope so the result is
    /// unit Lipschitz. The raw function has max slope ~1.1289 at z = sqrt(2),
    /// which would break every Jacobian-norm argument used downstream.
    static ActivationSpec gelu();

    /// User-supplied activation. Constants are validated against the
    /// callables on a coarse grid; throws PreconditionError on mismatch.
    static ActivationSpec custom(std::string name,
                                 std::function<double(double)> eval,
                                 std::function<double(double)> deriv1,
                                 std::function<double(double)> deriv2,
                                 double beta_phi,
                                 double lipschitz = 1.0);

    static ActivationSpec by_name(const std::string& name);
};

/// Finite-difference consistency check of deriv1 against eval and deriv2
/// against deriv1 over [lo, hi]. Mixed tolerance: |fd - analytic| <=
/// tol * max(1, |analytic|). Returns the worst mixed error seen.
double activation_fd_error(const ActivationSpec& act, double lo, double hi, int samples);

}  // namespace wn
