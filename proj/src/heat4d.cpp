#include "hmf/heat4d.hpp"

#include <cmath>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

#include "hmf/error.hpp"
#include "hmf/quadrature.hpp"

namespace hmf {

namespace {
// GSL must not abort the process on range errors; failures are detected
// from return codes / non-finite values instead.
const int gsl_handler_disabled = [] {
    gsl_set_error_handler_off();
    return 0;
}();
}  // namespace

GammaContext GammaContext::make(double gamma) {
    if (!(gamma > 1.0))
        throw domain_error("GammaContext: need gamma > 1");
    GammaContext ctx;
    ctx.gamma = gamma;
    const double eps = 1e-12;
    ctx.regime = std::fabs(gamma - 2.0) <= eps ? Regime::Critical
                 : gamma < 2.0                 ? Regime::Sub
                                               : Regime::Super;
    ctx.tail_form = std::fabs(gamma - 4.0) <= eps ? TailForm::AtFour
                    : gamma < 4.0                 ? TailForm::BelowFour
                                                  : TailForm::AboveFour;
    switch (ctx.tail_form) {
        case TailForm::BelowFour:
            ctx.C_gamma = std::pow(2.0, -gamma) * std::tgamma(2.0 - 0.5 * gamma);
            break;
        case TailForm::AtFour:
            ctx.C_gamma = 1.0 / 16.0;
            break;
        case TailForm::AboveFour:
            ctx.C_gamma = 1.0 / (4.0 * (gamma - 2.0) * (gamma - 4.0));
            break;
    }
    return ctx;
}

double GammaContext::v_gamma(double t) const {
    if (!(t > 0.0)) throw domain_error("v_gamma: need t > 0");
    switch (tail_form) {
        case TailForm::BelowFour: return std::pow(t, -0.5 * gamma);
        case TailForm::AtFour: return std::log1p(t) / (t * t);
        default: return 1.0 / (t * t);
    }
}

double angular_factor(double kappa) {
    if (!(kappa >= 0.0)) throw domain_error("angular_factor: need kappa >= 0");
    if (kappa < 1e-6) {
        // I_1(k)/k = 1/2 + k^2/16 + O(k^4); below this threshold the series
        // is exact to machine precision while the library Bessel call flushes
        // the e^{-k} correction.
        return std::exp(-kappa) * (0.5 + kappa * kappa / 16.0);
    }
    gsl_sf_result res;
    int status = gsl_sf_bessel_I1_scaled_e(kappa, &res);
    if (status != 0 || !std::isfinite(res.val))
        throw numerical_error("angular_factor: Bessel evaluation failed");
    return res.val / kappa;
}

double ring_kernel(double r, double s, double t) {
    if (!(t > 0.0) || !(r >= 0.0) || !(s >= 0.0))
        throw domain_error("ring_kernel: need t > 0 and r, s >= 0");
    const double d = r - s;
    const double arg = d * d / (4.0 * t);
    if (arg > 700.0) return 0.0;  // exp underflow regime; true value < 1e-300
    return s * s * s / (4.0 * t * t) * std::exp(-arg) *
           angular_factor(r * s / (2.0 * t));
}

double heat_convolve_initial(const std::function<double(double)>& g, double r,
                             double t, double rel_tol,
                             const std::vector<double>& breakpoints) {
    if (!(t > 0.0) || !(r >= 0.0))
        throw domain_error("heat_convolve_initial: need t > 0, r >= 0");
    const double w = 13.0 * std::sqrt(t);
    const double lo = std::max(0.0, r - w);
    const double hi = r + w;
    auto f = [&](double s) { return ring_kernel(r, s, t) * g(s); };
    // Pre-split at the kernel peak, its one-sigma shoulders, and any knots
    // of the data (integrate_split drops points outside [lo, hi]).
    std::vector<double> splits{r - 2.0 * std::sqrt(t), r,
                               r + 2.0 * std::sqrt(t)};
    splits.insert(splits.end(), breakpoints.begin(), breakpoints.end());
    return integrate_split(f, lo, hi, std::move(splits), rel_tol).value;
}

double heat_convolve_duhamel(
    const std::function<double(double, double)>& h, double r, double t,
    double t_start, double rel_tol,
    const std::function<std::vector<double>(double)>& spatial_breakpoints,
    const std::vector<double>& time_breakpoints) {
    if (!(t > t_start))
        throw domain_error("heat_convolve_duhamel: need t > t_start");
    const double u_max = std::sqrt(t - t_start);
    auto f = [&](double u) {
        const double dt = u * u;
        if (dt < 1e-300) return 0.0;
        const double s = t - dt;
        auto slice = [&](double x) { return h(x, s); };
        return 2.0 * u *
               heat_convolve_initial(
                   slice, r, dt, 0.1 * rel_tol,
                   spatial_breakpoints ? spatial_breakpoints(s)
                                       : std::vector<double>{});
    };
    std::vector<double> u_splits;
    u_splits.reserve(time_breakpoints.size());
    for (double s : time_breakpoints)
        if (s > t_start && s < t) u_splits.push_back(std::sqrt(t - s));
    return integrate_split(f, 0.0, u_max, u_splits, rel_tol).value;
}

double eval_psi_star(const GammaContext& ctx, double r, double t,
                     double rel_tol) {
    auto g = [&](double s) {
        return std::pow(1.0 + s * s, -0.5 * ctx.gamma);
    };
    return heat_convolve_initial(g, r, t, rel_tol);
}

double eval_Psi_star(const GammaContext& ctx, double r, double t,
                     double rel_tol) {
    return r * eval_psi_star(ctx, r, t, rel_tol);
}

}  // namespace hmf
