#pragma once
#include <functional>
#include <vector>

namespace hmf {

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
};

// Adaptive Gauss-Kronrod (7-15) integration on a finite interval.
// `rel_tol` is the target relative accuracy; the estimate achieved is
// reported in the result.  Throws numerical_error when the integrand
// produces non-finite values.
QuadResult integrate(const std::function<double(double)>& f, double a,
                     double b, double rel_tol = 1e-10, int max_depth = 18);

// Same, but with the interval pre-split at the given interior breakpoints
// (useful when the integrand has a known peak or kink).
QuadResult integrate_split(const std::function<double(double)>& f, double a,
                           double b, std::vector<double> breakpoints,
                           double rel_tol = 1e-10, int max_depth = 18);

// Single non-adaptive 15-point Kronrod panel.  For short smooth segments
// of a cumulative integral, where a relative target would force needless
// refinement on segments whose value is close to zero.
QuadResult integrate_panel(const std::function<double(double)>& f, double a,
                           double b);

}  // namespace hmf
