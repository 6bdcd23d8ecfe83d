#include "hmf/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hmf/error.hpp"

namespace hmf {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

QuadResult integrate(const std::function<double(double)>& f, double a,
                     double b, double rel_tol, int max_depth) {
    if (!(b >= a)) throw domain_error("integrate: b < a");
    if (a == b) return {0.0, 0.0};
    double err = 0.0;
    double val = GK::integrate(f, a, b, max_depth, rel_tol, &err);
    if (!std::isfinite(val))
        throw numerical_error("integrate: non-finite result");
    return {val, err};
}

QuadResult integrate_panel(const std::function<double(double)>& f, double a,
                           double b) {
    if (!(b >= a)) throw domain_error("integrate_panel: b < a");
    if (a == b) return {0.0, 0.0};
    double err = 0.0;
    double val = GK::integrate(f, a, b, 0, 0.0, &err);
    if (!std::isfinite(val))
        throw numerical_error("integrate_panel: non-finite result");
    return {val, err};
}

QuadResult integrate_split(const std::function<double(double)>& f, double a,
                           double b, std::vector<double> breakpoints,
                           double rel_tol, int max_depth) {
    breakpoints.push_back(a);
    breakpoints.push_back(b);
    std::sort(breakpoints.begin(), breakpoints.end());

    // First pass: one non-adaptive Kronrod panel per segment, which fixes
    // the overall scale of the integral.
    struct Segment {
        double lo, hi;
        QuadResult panel;
    };
    std::vector<Segment> segments;
    double scale = 0.0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        double lo = std::max(a, breakpoints[i]);
        double hi = std::min(b, breakpoints[i + 1]);
        if (!(hi > lo)) continue;
        Segment seg{lo, hi, integrate_panel(f, lo, hi)};
        scale += std::abs(seg.panel.value);
        segments.push_back(seg);
    }

    // Second pass: accept a segment outright when its panel error is
    // negligible against the whole integral, refining only the rest.  A
    // purely relative criterion per segment would never terminate on a
    // segment whose own integral nearly cancels (a cutoff tail clipped to
    // a sliver), even though its contribution is far below tolerance.
    const double accept =
        segments.empty() ? 0.0
                         : rel_tol * scale / static_cast<double>(segments.size());
    QuadResult total;
    for (const Segment& seg : segments) {
        QuadResult part = seg.panel.error_estimate <= accept
                              ? seg.panel
                              : integrate(f, seg.lo, seg.hi, rel_tol, max_depth);
        total.value += part.value;
        total.error_estimate += part.error_estimate;
    }
    return total;
}

}  // namespace hmf
