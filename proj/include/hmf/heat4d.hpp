#pragma once
#include <functional>
#include <vector>

namespace hmf {

// Decay regime of the initial-data tail exponent gamma ( > 1 ).
enum class Regime { Sub, Critical, Super };  // gamma < 2, = 2, > 2

// Shape of the slow envelope v_gamma(t) governing the linear tail evolution
// (the dividing value is gamma = 4, where a logarithm appears).
enum class TailForm { BelowFour, AtFour, AboveFour };

// Bundle of gamma-derived constants used throughout the pipeline.
//
//   C_gamma = (4 pi)^{-2} * integral over R^4 of
//               e^{-|z|^2/4} |z|^{-gamma} dz          (gamma < 4)
//               <y>^{-4} restricted as a log coefficient (gamma = 4)
//               <y>^{-gamma} dy                        (gamma > 4)
// reduced to closed form:
//   gamma < 4 : 2^{-gamma} * Gamma(2 - gamma/2)
//   gamma = 4 : 1/16
//   gamma > 4 : 1 / (4 (gamma-2)(gamma-4))
//
//   v_gamma(t) = t^{-gamma/2}        (gamma < 4)
//                t^{-2} ln(1 + t)    (gamma = 4)
//                t^{-2}              (gamma > 4)
struct GammaContext {
    double gamma = 0.0;
    Regime regime = Regime::Super;
    TailForm tail_form = TailForm::BelowFour;
    double C_gamma = 0.0;

    static GammaContext make(double gamma);
    double v_gamma(double t) const;
};

// Angular factor of the radial heat kernel on R^4:
//   F(kappa) = e^{-kappa} I_1(kappa) / kappa,  F(0) = 1/2,
// evaluated with the scaled Bessel function so large kappa cannot overflow.
double angular_factor(double kappa);

// Radial heat kernel ring density: the R^4 Gaussian kernel integrated over
// the sphere |y| = s,
//   k(r, s, t) = s^3/(4 t^2) * e^{-(r-s)^2/(4t)} * F(r s / (2 t)),
// so that (e^{tL} g)(r) = integral_0^inf k(r, s, t) g(s) ds for radial g.
// Satisfies mass 1 in s and the symmetry k(r,s,t) r^3 = k(s,r,t) s^3.
double ring_kernel(double r, double s, double t);

// Action of the 4D heat semigroup on radial data g after time t > 0.
// The quadrature window is |r - s| <= 13 sqrt(t) (Gaussian tail < 1e-18).
// `breakpoints` lists radii where g has limited smoothness (cutoff knots);
// the quadrature panels are aligned there, which keeps the adaptive
// error estimate reliable and the returned value smooth in r.
double heat_convolve_initial(const std::function<double(double)>& g, double r,
                             double t, double rel_tol = 1e-10,
                             const std::vector<double>& breakpoints = {});

// Duhamel integral int_{t_start}^{t} e^{(t-s) Delta} h(., s) ds evaluated at
// radius r, using the substitution s = t - u^2 to cluster quadrature nodes
// near the singular end s -> t.  `spatial_breakpoints`, when provided, maps a
// slice time s to the radii where h(., s) has limited smoothness.
// `time_breakpoints` lists slice times where h is only piecewise smooth in s
// (interpolated-trajectory knots); the time quadrature panels are aligned
// there, without which the adaptive refinement grinds against every knot.
double heat_convolve_duhamel(
    const std::function<double(double, double)>& h, double r, double t,
    double t_start, double rel_tol = 1e-8,
    const std::function<std::vector<double>(double)>& spatial_breakpoints = {},
    const std::vector<double>& time_breakpoints = {});

// psi*(r, t): the heat evolution of the pure tail datum <s>^{-gamma},
// whose central value obeys  psi*(0, t) ~ C_gamma v_gamma(t).
double eval_psi_star(const GammaContext& ctx, double r, double t,
                     double rel_tol = 1e-10);

// Psi*(r, t) = r * psi*(r, t): corresponding solution of the linearized
// (m = 1 equivariant) flow used as the outer tail profile.
double eval_Psi_star(const GammaContext& ctx, double r, double t,
                     double rel_tol = 1e-10);

}  // namespace hmf
