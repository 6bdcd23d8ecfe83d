#include "hmf/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "hmf/corrector.hpp"
#include "hmf/error.hpp"
#include "hmf/kernels.hpp"

namespace hmf {

namespace {

constexpr double kPi = 3.14159265358979323846;

using FieldFn = std::function<double(double, double)>;

// sin(x) - x, evaluated without cancellation near zero.
double sin_minus_x(double x) {
    const double ax = std::abs(x);
    if (ax < 1e-3) {
        const double x2 = x * x;
        return x * x2 * (-1.0 / 6.0 + x2 * (1.0 / 120.0 - x2 / 5040.0));
    }
    return std::sin(x) - x;
}

// Q(rho) - 2/rho = 2 (atan(1/rho) - 1/rho), stable for large rho.
double q_minus_two_over_rho(double rho) {
    const double x = 1.0 / rho;
    if (x < 1e-3) {
        const double x2 = x * x;
        return 2.0 * x * x2 * (-1.0 / 3.0 + x2 * (0.2 - x2 / 7.0));
    }
    return 2.0 * (std::atan(x) - x);
}

double sample_field(const FieldFn& v, double r, double t) {
    const double f = v(r, t);
    if (!std::isfinite(f))
        throw numerical_error("error operator: field not finite at stencil node");
    return f;
}

// v_rr + v_r / r from a centered 5-point stencil with spacing h.
double radial_part(const FieldFn& v, double r, double t, double h) {
    const std::vector<double> nodes{r - 2.0 * h, r - h, r, r + h, r + 2.0 * h};
    const auto w = fd_weights(r, nodes, 2);
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const double f = sample_field(v, nodes[j], t);
        d1 += w[1][j] * f;
        d2 += w[2][j] * f;
    }
    return d2 + d1 / r;
}

double time_derivative(const FieldFn& v, double r, double t, double k) {
    return (sample_field(v, r, t + k) - sample_field(v, r, t - k)) / (2.0 * k);
}

template <class ZeroOrder>
OperatorValue operator_core(const FieldFn& v, double r, double t,
                            const StencilOptions& opt, ZeroOrder zero_order) {
    if (!v) throw domain_error("error operator: empty field");
    if (!std::isfinite(r) || !(r > 0.0))
        throw domain_error("error operator: need finite r > 0");
    if (!std::isfinite(t) || !(t > 0.0))
        throw domain_error("error operator: need finite t > 0");
    if (!(opt.r_step_fraction > 0.0) || !(opt.t_step_fraction > 0.0))
        throw domain_error("error operator: step fractions must be positive");
    const double h = opt.r_step_fraction * std::min(r, std::sqrt(t));
    if (!(r - 2.0 * h > 0.0))
        throw domain_error("error operator: radial stencil leaves r > 0");
    const double k = opt.t_step_fraction * t;
    if (!(t - k > 0.0))
        throw domain_error("error operator: time stencil leaves t > 0");

    const double rad_h = radial_part(v, r, t, h);
    const double rad_h2 = radial_part(v, r, t, 0.5 * h);
    const double dt_k = time_derivative(v, r, t, k);
    const double dt_k2 = time_derivative(v, r, t, 0.5 * k);
    const double center = sample_field(v, r, t);

    // Richardson-extrapolate each halved pair; the estimate is the
    // leading-order error of the un-extrapolated half-step values.
    const double rad = (16.0 * rad_h2 - rad_h) / 15.0;
    const double dt = (4.0 * dt_k2 - dt_k) / 3.0;

    OperatorValue out;
    out.value = -dt + rad - zero_order(center) / (r * r);
    out.error_estimate =
        std::abs(rad_h - rad_h2) / 15.0 + std::abs(dt_k - dt_k2) / 3.0;
    return out;
}

// Slow forcing phi1 + phi2 + psi* sampled on a log-rho grid at one time,
// interpolable in ln(rho) with constant continuation outside the grid.
struct SlowForcing {
    double mu = 0.0;
    double edge = 0.0;  // sqrt(t) / mu
    double lo = 0.0, hi = 0.0;
    PchipInterpolant interp;  // value vs ln(rho)

    double operator()(double rho) const {
        const double x = std::clamp(rho, lo, hi);
        return interp(std::log(x));
    }
};

SlowForcing build_slow_forcing(const GammaContext& ctx, const MuModel& mu,
                               double t, const AnsatzOptions& opt) {
    SlowForcing out;
    out.mu = mu.mu(t);
    if (!(out.mu > 0.0) || !std::isfinite(out.mu))
        throw numerical_error("slow forcing: scale model returned non-positive mu");
    out.edge = std::sqrt(t) / out.mu;
    out.lo = opt.g_rho_min;
    out.hi = 2.05 * out.edge;  // just past the cutoff support edge 2 sqrt(t)/mu
    if (!(out.hi > 4.0 * out.lo))
        throw domain_error("slow forcing: cutoff edge too close to the inner grid radius");
    const auto nodes = log_spaced(out.lo, out.hi, opt.g_points_per_decade);
    std::vector<double> lx, gy;
    lx.reserve(nodes.size());
    gy.reserve(nodes.size());
    for (const double rho : nodes) {
        const double r = out.mu * rho;
        const auto vc = eval_varphi_corrections(mu, r, t, opt.t0, opt.duhamel_rel_tol);
        const double val = vc.total() + eval_psi_star(ctx, r, t, opt.psi_rel_tol);
        if (!std::isfinite(val))
            throw numerical_error("slow forcing: non-finite sample");
        lx.push_back(std::log(rho));
        gy.push_back(val);
    }
    out.interp = PchipInterpolant(std::move(lx), std::move(gy));
    return out;
}

}  // namespace

OperatorValue apply_error_operator(const FieldFn& v, double r, double t,
                                   StencilOptions opt) {
    return operator_core(v, r, t, opt,
                         [](double f) { return 0.5 * std::sin(2.0 * f); });
}

OperatorValue eval_heat_defect(const FieldFn& v, double r, double t,
                               StencilOptions opt) {
    return operator_core(v, r, t, opt, [](double f) { return f; });
}

double Q_profile(double r, double mu) {
    if (!(mu > 0.0) || !std::isfinite(mu))
        throw domain_error("Q_profile: need finite mu > 0");
    if (!(r >= 0.0) || !std::isfinite(r))
        throw domain_error("Q_profile: need finite r >= 0");
    if (r == 0.0) return kPi;
    return 2.0 * std::atan2(mu, r);
}

double eval_v_star(const MuModel& mu, double r, double t) {
    if (!(r >= 0.0) || !std::isfinite(r))
        throw domain_error("v_star: need finite r >= 0");
    if (!(t > 0.0) || !std::isfinite(t))
        throw domain_error("v_star: need finite t > 0");
    const double z = r / std::sqrt(t);
    if (z >= 2.0) return 0.0;
    return eval_cutoff(z) * Q_profile(r, mu.mu(t));
}

FirstErrorTerms eval_first_error_terms(const MuModel& mu, double r, double t) {
    if (!(r >= 0.0) || !std::isfinite(r))
        throw domain_error("first error terms: need finite r >= 0");
    if (!(t > 0.0) || !std::isfinite(t))
        throw domain_error("first error terms: need finite t > 0");
    FirstErrorTerms out;
    const double st = std::sqrt(t);
    const double z = r / st;
    if (z >= 2.0) return out;  // every group carries a factor of the cutoff

    const double m = mu.mu(t);
    const double md = mu.mu_dot(t);
    const double eta = eval_cutoff(z);
    const double rho = r / m;
    // E1 = mu^{-1} mu_dot eta(z) rho dQ/drho with dQ/drho = -2/(1+rho^2).
    out.E1 = -2.0 * (md / m) * eta * rho / (1.0 + rho * rho);
    if (z <= 1.0) return out;  // eta == 1: the cutoff-derivative groups vanish

    const double ep = eval_cutoff(z, 1);
    const double epp = eval_cutoff(z, 2);
    const double bracket = r / (2.0 * t * st) + 1.0 / (r * st);
    out.E21 = 2.0 / (t * rho) * epp - 4.0 / (m * st * rho * rho) * ep +
              2.0 / rho * bracket * ep;

    const double qm2 = q_minus_two_over_rho(rho);
    const double dq_plus = 2.0 / (rho * rho * (1.0 + rho * rho));
    out.E22 = epp / t * qm2 + 2.0 / (m * st) * ep * dq_plus + bracket * ep * qm2;

    // eta sin(2Q)/(2r^2) - sin(2 eta Q)/(2r^2), via F(x) = sin(x) - x:
    // eta sin(2Q) - sin(2 eta Q) = eta F(2Q) - F(2 eta Q) exactly.
    const double Q = Q_profile(r, m);
    out.trig_remainder =
        (eta * sin_minus_x(2.0 * Q) - sin_minus_x(2.0 * eta * Q)) /
        (2.0 * r * r);
    return out;
}

double slow_source_1(const MuModel& mu, double r, double s) {
    if (!(r >= 0.0) || !std::isfinite(r))
        throw domain_error("slow source 1: need finite r >= 0");
    if (!(s > 0.0) || !std::isfinite(s))
        throw domain_error("slow source 1: need finite s > 0");
    const double z = r / std::sqrt(s);
    if (z >= 2.0) return 0.0;
    const double m = mu.mu(s);
    return -2.0 * mu.mu_dot(s) / (m * m + r * r) * eval_cutoff(z);
}

double slow_source_2(const MuModel& mu, double r, double s) {
    if (!(r >= 0.0) || !std::isfinite(r))
        throw domain_error("slow source 2: need finite r >= 0");
    if (!(s > 0.0) || !std::isfinite(s))
        throw domain_error("slow source 2: need finite s > 0");
    const double st = std::sqrt(s);
    const double z = r / st;
    if (z <= 1.0 || z >= 2.0) return 0.0;  // supported on the cutoff annulus

    const double m = mu.mu(s);
    const double ep = eval_cutoff(z, 1);
    const double epp = eval_cutoff(z, 2);
    // r^{-1} E21 = 2 mu s^{-2} (z^{-2} eta'' + (1/(2z) - z^{-3}) eta').
    const double part21 =
        2.0 * m / (s * s) *
        (epp / (z * z) + ep * (0.5 / z - 1.0 / (z * z * z)));

    const double rho = r / m;
    const double qm2 = q_minus_two_over_rho(rho);
    const double dq_plus = 2.0 / (rho * rho * (1.0 + rho * rho));
    const double bracket = r / (2.0 * s * st) + 1.0 / (r * st);
    const double e22 =
        epp / s * qm2 + 2.0 / (m * st) * ep * dq_plus + bracket * ep * qm2;
    return part21 + e22 / r;
}

VarphiCorrections eval_varphi_corrections(const MuModel& mu, double r, double t,
                                          double t0, double rel_tol) {
    if (!(r >= 0.0) || !std::isfinite(r))
        throw domain_error("varphi corrections: need finite r >= 0");
    if (!(t0 > 0.0) || !std::isfinite(t0))
        throw domain_error("varphi corrections: need finite t0 > 0");
    if (!(t > 0.5 * t0))
        throw domain_error("varphi corrections: need t > t0/2 (start of the slow sources)");
    if (0.5 * t0 < mu.t_min() || t > mu.t_max())
        throw domain_error("varphi corrections: scale model window must cover [t0/2, t]");
    if (!(rel_tol > 0.0))
        throw domain_error("varphi corrections: tolerance must be positive");

    // Both sources carry the outer cutoff, whose polynomial transition has
    // limited smoothness at radii sqrt(s) and 2 sqrt(s); aligning quadrature
    // panels there keeps the returned values smooth in r.
    auto knots = [](double s) {
        const double ss = std::sqrt(s);
        return std::vector<double>{ss, 2.0 * ss};
    };
    // Interpolated scale models are only piecewise smooth in time; aligning
    // the time panels with their knots keeps the cost flat instead of the
    // refinement grinding against every knot.
    const std::vector<double> time_knots =
        mu.smoothness_breakpoints(0.5 * t0, t);
    VarphiCorrections out;
    out.phi1 = heat_convolve_duhamel(
        [&mu](double x, double s) { return slow_source_1(mu, x, s); }, r, t,
        0.5 * t0, rel_tol, knots, time_knots);
    out.phi2 = heat_convolve_duhamel(
        [&mu](double x, double s) { return slow_source_2(mu, x, s); }, r, t,
        0.5 * t0, rel_tol, knots, time_knots);
    return out;
}

AnsatzBundle::AnsatzBundle(const GammaContext& ctx, const MuModel& mu,
                           AnsatzOptions opt)
    : ctx_(ctx), mu_(&mu), opt_(opt) {
    if (!(opt_.t0 > 0.0) || !std::isfinite(opt_.t0))
        throw domain_error("ansatz bundle: t0 must be positive");
    if (0.5 * opt_.t0 < mu.t_min())
        throw domain_error("ansatz bundle: scale model must cover t0/2");
    if (!(opt_.duhamel_rel_tol > 0.0) || !(opt_.psi_rel_tol > 0.0))
        throw domain_error("ansatz bundle: tolerances must be positive");
    if (!(opt_.g_points_per_decade >= 4.0))
        throw domain_error("ansatz bundle: need at least 4 forcing samples per decade");
    if (!(opt_.g_rho_min > 0.0))
        throw domain_error("ansatz bundle: forcing grid must start at rho > 0");
    if (!(opt_.phi_e_points_per_decade >= 32.0))
        throw domain_error("ansatz bundle: need at least 32 profile points per decade");
    if (!(opt_.phi_e_time_step_fraction > 0.0) ||
        !(opt_.phi_e_time_step_fraction <= 0.2))
        throw domain_error("ansatz bundle: time step fraction must lie in (0, 0.2]");
}

double AnsatzBundle::TimeSlice::g(double rho) const {
    const double x = std::clamp(rho, g_lo, g_hi);
    return g_ln(std::log(x));
}

const AnsatzBundle::TimeSlice& AnsatzBundle::slice(double t) const {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = slices_.find(t);
    if (it != slices_.end()) return it->second;

    SlowForcing forcing = build_slow_forcing(ctx_, *mu_, t, opt_);
    TimeSlice s;
    s.mu = forcing.mu;
    s.edge = forcing.edge;
    s.g_lo = forcing.lo;
    s.g_hi = forcing.hi;
    s.g_ln = forcing.interp;
    s.M = eval_M(ctx_, s.mu, t, forcing);
    auto source = build_Htilde(ctx_, s.mu, t, forcing, s.M);
    s.profile = std::make_shared<CorrectionProfile>(solve_Phi_e(
        std::move(source), 0.6 * s.edge, t, opt_.phi_e_points_per_decade));
    return slices_.emplace(t, std::move(s)).first->second;
}

double AnsatzBundle::v_star(double r, double t) const {
    return eval_v_star(*mu_, r, t);
}

AnsatzComponents AnsatzBundle::components(double r, double t) const {
    if (!(r >= 0.0) || !std::isfinite(r))
        throw domain_error("ansatz components: need finite r >= 0");
    if (!(t > 0.0) || !std::isfinite(t))
        throw domain_error("ansatz components: need finite t > 0");
    if (r == 0.0) {
        // Every correction carries a factor of r (or O(rho^3) at the core).
        AnsatzComponents c;
        c.core = kPi;
        return c;
    }
    const std::pair<double, double> key{r, t};
    {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto it = components_.find(key);
        if (it != components_.end()) return it->second;
    }

    AnsatzComponents c;
    const double z = r / std::sqrt(t);
    c.core = z >= 2.0 ? 0.0 : eval_cutoff(z) * Q_profile(r, mu_->mu(t));
    const auto vc =
        eval_varphi_corrections(*mu_, r, t, opt_.t0, opt_.duhamel_rel_tol);
    c.Phi1 = r * vc.phi1;
    c.Phi2 = r * vc.phi2;
    c.Psi_star = eval_Psi_star(ctx_, r, t, opt_.psi_rel_tol);
    if (4.0 * z < 2.0) {
        const TimeSlice& s = slice(t);
        c.Phi_e_term = eval_cutoff(4.0 * z) * s.profile->value_at(r / s.mu);
    }
    if (!std::isfinite(c.core) || !std::isfinite(c.Phi1) ||
        !std::isfinite(c.Phi2) || !std::isfinite(c.Psi_star) ||
        !std::isfinite(c.Phi_e_term))
        throw numerical_error("ansatz components: non-finite component");

    std::lock_guard<std::mutex> lock(mutex_);
    return components_.emplace(key, c).first->second;
}

double AnsatzBundle::v1(double r, double t) const {
    return components(r, t).v1();
}

GroupedError AnsatzBundle::grouped_error(double r, double t) const {
    if (!(r > 0.0) || !std::isfinite(r))
        throw domain_error("grouped error: need finite r > 0");
    if (!(t > 0.0) || !std::isfinite(t))
        throw domain_error("grouped error: need finite t > 0");

    const double st = std::sqrt(t);
    const double z = r / st;
    const double z4 = 4.0 * z;
    // The elliptic correction lives on z < 1/2, so its time-slice data is
    // needed only there; elsewhere a bare scale evaluation suffices.
    const TimeSlice* s0 = z4 < 2.0 ? &slice(t) : nullptr;
    const double m = s0 ? s0->mu : mu_->mu(t);
    if (!std::isfinite(m) || !(m > 0.0))
        throw numerical_error("grouped error: scale model returned a bad value");
    const double rho = r / m;
    const double eta4 = z4 < 2.0 ? eval_cutoff(z4) : 0.0;
    const double eta = z < 2.0 ? eval_cutoff(z) : 0.0;

    GroupedError ge;

    // Time derivative of the elliptic correction field and the projection row.
    if (eta4 > 0.0) {
        const double dt = opt_.phi_e_time_step_fraction * t;
        const TimeSlice& sp = slice(t + dt);
        const TimeSlice& sm = slice(t - dt);
        const double fwd = sp.profile->value_at(r / sp.mu);
        const double bwd = sm.profile->value_at(r / sm.mu);
        ge.dt_phi_e_term = -eta4 * (fwd - bwd) / (2.0 * dt);
        if (rho < 2.0) {
            const double Z = rho / (rho * rho + 1.0);
            ge.projection_term = eta4 * (s0->M / m) * eval_cutoff(rho) * Z /
                                 projection_denominator();
        }
    }

    // Cutoff-derivative rows of the outer localization.
    double cut = 0.0;
    if (z4 > 1.0 && z4 < 2.0) {
        const double profile_val = s0->profile->value_at(rho);
        const double profile_dr = s0->profile->d_rho_at(rho) / m;
        const double e1 = eval_cutoff(z4, 1);
        const double e2 = eval_cutoff(z4, 2);
        cut = 2.0 * r / (t * st) * e1 * profile_val +
              16.0 / t * e2 * profile_val + 8.0 / st * e1 * profile_dr +
              4.0 / (r * st) * e1 * profile_val;
    }

    // Forcing-replacement row: the assembled field couples the interpolated
    // slow forcing (inside the localized elliptic solve) to the exact one.
    const auto c = components(r, t);
    const double s1 = c.Phi1 + c.Phi2 + c.Psi_star;
    const double opr = 1.0 + rho * rho;
    const double w_over_mu = -8.0 * rho / (opr * opr) / m;
    const double g_here = eta4 > 0.0 ? s0->g(rho) : 0.0;
    ge.eta_mismatch = cut + w_over_mu * (eta4 * g_here - eta * (s1 / r));

    // Trig row, branch-wise in the cutoff regions to avoid cancellation.
    const double B = s1 + c.Phi_e_term;
    const double two_r2 = 2.0 * r * r;
    if (z >= 2.0) {
        ge.trig_term = -sin_minus_x(2.0 * s1) / two_r2;
    } else if (z <= 1.0) {
        const double sin2Q = 4.0 * rho * (rho * rho - 1.0) / (opr * opr);
        const double cos2Q = 1.0 - 8.0 * rho * rho / (opr * opr);
        const double sinB = std::sin(B);
        ge.trig_term =
            (2.0 * sin2Q * sinB * sinB - cos2Q * sin_minus_x(2.0 * B)) / two_r2;
    } else {
        const double Q = Q_profile(r, m);
        const double sinQ_sq = 4.0 * rho * rho / (opr * opr);
        ge.trig_term = (eta * sin_minus_x(2.0 * Q) -
                        sin_minus_x(2.0 * (eta * Q + B)) -
                        4.0 * eta * B * sinQ_sq) /
                       two_r2;
    }
    return ge;
}

double AnsatzBundle::M_at(double t) const { return slice(t).M; }

std::shared_ptr<const CorrectionProfile> AnsatzBundle::profile_at(double t) const {
    return slice(t).profile;
}

double eval_M_true(const GammaContext& ctx, const MuModel& mu, double t,
                   const AnsatzOptions& opt) {
    const SlowForcing forcing = build_slow_forcing(ctx, mu, t, opt);
    return eval_M(ctx, forcing.mu, t, forcing);
}

OrthogonalityRefineResult refine_mu_for_orthogonality(
    const GammaContext& ctx, const SplitParameters& split,
    const MuHorizon& horizon, int outer_iterations, double samples_per_decade,
    AnsatzOptions opt) {
    if (outer_iterations < 0)
        throw domain_error("orthogonality refinement: iterations must be >= 0");
    if (!(samples_per_decade >= 0.5))
        throw domain_error("orthogonality refinement: need >= 0.5 samples per decade");
    // Tie the start of the slow sources to the enforcement window.
    opt.t0 = horizon.t0;

    LeadingOrderMu base(ctx);
    if (0.25 * horizon.t0 < base.t_min())
        throw domain_error("orthogonality refinement: grid start t0/4 below the model window");

    OrthogonalityRefineResult out;
    out.report = solve_mu(ctx, split, horizon, base,
                          make_residual_forcing(ctx, base));
    for (int k = 0; k < outer_iterations; ++k) {
        const MuTrajectory traj = out.report.trajectory();
        out.sample_times =
            log_spaced(0.74 * horizon.t0, horizon.T, samples_per_decade);
        out.M_before.clear();
        std::vector<double> lx, wy;
        lx.reserve(out.sample_times.size());
        wy.reserve(out.sample_times.size());
        for (const double ts : out.sample_times) {
            const double Mv = eval_M_true(ctx, traj, ts, opt);
            out.M_before.push_back(Mv);
            lx.push_back(std::log(ts));
            wy.push_back(Mv * ts * ts);
        }
        const PchipInterpolant normalized_fit(std::move(lx), std::move(wy));
        const double lo = out.sample_times.front();
        const double hi = out.sample_times.back();
        MuForcing forcing;
        forcing.a1 = [normalized_fit, lo, hi](double t) {
            const double tc = std::clamp(t, lo, hi);
            return normalized_fit(std::log(tc)) / (t * t);
        };
        out.report = solve_mu(ctx, split, horizon, traj, forcing);
    }
    return out;
}

}  // namespace hmf
