#include "hmf/mu_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hmf/error.hpp"
#include "hmf/kernels.hpp"

namespace hmf {

namespace {

std::vector<double> to_log(const std::vector<double>& t) {
    std::vector<double> x(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) x[i] = std::log(t[i]);
    return x;
}

}  // namespace

LeadingOrderMu::LeadingOrderMu(const GammaContext& ctx) : ctx_(ctx) {
    if (ctx_.regime == Regime::Sub) {
        const double p0 = 0.5 * ctx_.gamma;
        c1_ = 2.0 * ctx_.C_gamma / ((1.0 - p0) * (ctx_.gamma - 1.0));
    }
}

double LeadingOrderMu::mu(double t) const {
    if (!(t >= std::exp(2.0)))
        throw domain_error("LeadingOrderMu: need t >= e^2");
    const double L = std::log(t);
    switch (ctx_.regime) {
        case Regime::Sub:
            return c1_ * std::pow(t, 1.0 - 0.5 * ctx_.gamma) / L;
        case Regime::Critical:
            return 2.0 * ctx_.C_gamma + 1.0 / L;
        default:
            return 1.0 / L;
    }
}

double LeadingOrderMu::mu_dot(double t) const {
    if (!(t >= std::exp(2.0)))
        throw domain_error("LeadingOrderMu: need t >= e^2");
    const double L = std::log(t);
    if (ctx_.regime == Regime::Sub) {
        const double p0 = 0.5 * ctx_.gamma;
        return c1_ * std::pow(t, -p0) / L * ((1.0 - p0) - 1.0 / L);
    }
    // Critical and Super share d/dt (ln t)^{-1} = -1/(t ln^2 t).
    return -1.0 / (t * L * L);
}

MuTrajectory::MuTrajectory(std::vector<double> times, std::vector<double> mu,
                           std::vector<double> mu_dot)
    : times_(std::move(times)), mu_(std::move(mu)), mu_dot_(std::move(mu_dot)) {
    if (times_.size() < 4 || mu_.size() != times_.size() ||
        mu_dot_.size() != times_.size())
        throw domain_error("MuTrajectory: need >= 4 matching samples");
    for (double v : mu_)
        if (!(v > 0.0)) throw domain_error("MuTrajectory: mu must stay positive");
    mu_ln_ = PchipInterpolant(to_log(times_), mu_);
    mu_dot_ln_ = PchipInterpolant(to_log(times_), mu_dot_);
}

MuTrajectory MuTrajectory::sample(const MuModel& m, double t_lo, double t_hi,
                                  double points_per_decade) {
    if (!(t_lo >= m.t_min()) || !(t_hi <= m.t_max()))
        throw domain_error("MuTrajectory::sample: window outside model validity");
    auto times = log_spaced(t_lo, t_hi, points_per_decade);
    std::vector<double> mu(times.size()), md(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        mu[i] = m.mu(times[i]);
        md[i] = m.mu_dot(times[i]);
    }
    return MuTrajectory(std::move(times), std::move(mu), std::move(md));
}

double MuTrajectory::mu(double t) const {
    if (!(t >= times_.front() * (1 - 1e-12)) ||
        !(t <= times_.back() * (1 + 1e-12)))
        throw domain_error("MuTrajectory: evaluation outside grid");
    return mu_ln_(std::log(t));
}

double MuTrajectory::mu_dot(double t) const {
    if (!(t >= times_.front() * (1 - 1e-12)) ||
        !(t <= times_.back() * (1 + 1e-12)))
        throw domain_error("MuTrajectory: evaluation outside grid");
    return mu_dot_ln_(std::log(t));
}

std::vector<double> MuTrajectory::smoothness_breakpoints(double t_lo,
                                                         double t_hi) const {
    auto first = std::upper_bound(times_.begin(), times_.end(), t_lo);
    auto last = std::lower_bound(first, times_.end(), t_hi);
    return std::vector<double>(first, last);
}

QuadResult eval_nonlocal_integral_result(const MuModel& m, double t,
                                         double rel_tol) {
    if (!(t > 0.0)) throw domain_error("eval_nonlocal_integral: need t > 0");
    const double mu_t = m.mu(t);
    const double mu2 = mu_t * mu_t;
    if (!(mu2 < 0.5 * t))
        throw domain_error("eval_nonlocal_integral: mu(t)^2 >= t/2");
    if (0.5 * t < m.t_min() || t > m.t_max())
        throw domain_error("eval_nonlocal_integral: window outside model validity");
    // u = ln(t - s):  I = int_{ln mu^2}^{ln(t/2)} mu_dot(t - e^u) du.
    auto f = [&](double u) { return m.mu_dot(t - std::exp(u)); };
    return integrate(f, std::log(mu2), std::log(0.5 * t), rel_tol);
}

double eval_nonlocal_integral(const MuModel& m, double t, double rel_tol) {
    return eval_nonlocal_integral_result(m, t, rel_tol).value;
}

double eval_nonlocal_residual(const GammaContext& ctx, const MuModel& m,
                              double t, double rel_tol) {
    return eval_nonlocal_integral(m, t, rel_tol) + m.mu(t) / t -
           2.0 * ctx.C_gamma * ctx.v_gamma(t);
}

void SplitParameters::validate(const GammaContext& ctx) const {
    if (!(nu > 0.0) || !(2.0 * nu < std::min(ctx.gamma - 1.0, 1.0)))
        throw domain_error("SplitParameters: need 0 < 2 nu < min(gamma-1, 1)");
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw domain_error("SplitParameters: need 0 < alpha < 1");
    if (std::fabs(p + 1.0) < 1e-9)
        throw domain_error("SplitParameters: p = -1 is excluded");
    if (regime_p_check) {
        if (ctx.regime == Regime::Sub && !(p < -0.5 * ctx.gamma))
            throw domain_error("SplitParameters: need p < -gamma/2 below the critical exponent");
        if (ctx.regime != Regime::Sub && !(p < -1.0))
            throw domain_error("SplitParameters: need p < -1 at/above the critical exponent");
    }
}

MuForcing make_residual_forcing(const GammaContext& ctx, const MuModel& base) {
    MuForcing f;
    const MuModel* b = &base;
    GammaContext c = ctx;
    f.a1 = [c, b](double t) { return -eval_nonlocal_residual(c, *b, t); };
    return f;
}

MuTrajectory MuSolveReport::trajectory() const {
    return MuTrajectory(times, mu, mu_dot);
}

double power_log_tail_integral(double amplitude, double power,
                               double log_power, double T) {
    if (!(T > std::exp(1.0)))
        throw domain_error("power_log_tail_integral: need T > e");
    const double b = power, c = log_power;
    const double L = std::log(T);
    // Substitute t = T e^{L(e^x - 1)}  (i.e. ln t = L e^x), x in [0, inf):
    //   integral = A T^{b+1} L^{c+1} int_0^inf exp((b+1) L (e^x - 1) + (c+1) x) dx.
    if (b > -1.000001) {
        // No genuine power decay.  An effective t^{-1} ln^c t tail (a fitted
        // power within noise of -1 is regularized to -1) integrates to
        // A L^{c+1} / (-c-1) when the log power compensates; anything else
        // diverges and carries no tail mass.
        if (c < -1.05 && b < -0.9)
            return amplitude * std::pow(L, c + 1.0) / (-c - 1.0);
        return 0.0;
    }
    auto exponent = [&](double x) {
        return (b + 1.0) * L * std::expm1(x) + (c + 1.0) * x;
    };
    double X = 1.0;
    while (exponent(X) > -30.0 && X < 200.0) X *= 1.5;
    auto f = [&](double x) { return std::exp(exponent(x)); };
    const double I = integrate(f, 0.0, X, 1e-9).value;
    return amplitude * std::pow(T, b + 1.0) * std::pow(L, c + 1.0) * I;
}

MuSolveReport solve_mu(const GammaContext& ctx, const SplitParameters& split,
                       const MuHorizon& horizon, const MuModel& base,
                       const MuForcing& forcing, const MuSolveOptions& options) {
    split.validate(ctx);
    if (!(horizon.t0 >= 8.0) || !(horizon.T >= 10.0 * horizon.t0) ||
        !(horizon.points_per_decade >= 8.0))
        throw domain_error("solve_mu: need t0 >= 8, T >= 10 t0, ppd >= 8");
    if (!(std::pow(0.75 * horizon.t0, split.nu) > 2.2))
        throw domain_error(
            "solve_mu: history split needs t^nu > 2 at the activation edge; "
            "raise t0 or nu");
    if (!(base.t_min() <= 0.25 * horizon.t0) || !(base.t_max() >= horizon.T))
        throw domain_error("solve_mu: base model does not cover the grid");

    const auto times = log_spaced(0.25 * horizon.t0, horizon.T,
                                  horizon.points_per_decade);
    const std::size_t n = times.size();
    const auto lnt = to_log(times);

    // Activation ramp: 0 below 0.75 t0, 1 above t0 (C^2 transition).
    std::vector<double> chi(n), denom(n), force(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = times[i];
        const double x = 2.0 - (t - 0.75 * horizon.t0) / (0.25 * horizon.t0);
        chi[i] = t <= 0.75 * horizon.t0 ? 0.0
                 : t >= horizon.t0      ? 1.0
                                        : eval_cutoff(x);
        denom[i] = 1.0;  // unused on inactive nodes (chi = 0 pins mu1_dot = 0)
        force[i] = 0.0;
        if (chi[i] > 0.0) {
            denom[i] = (1.0 - split.nu) * lnt[i] - 2.0 * std::log(base.mu(t));
            if (!(denom[i] > 0.5))
                throw numerical_error("solve_mu: splitting denominator too small");
            if (forcing.a1) force[i] += forcing.a1(t);
            if (forcing.a2) force[i] += forcing.a2(t);
            if (forcing.a3) force[i] += forcing.a3(t);
        }
    }

    std::vector<double> md(n, 0.0);  // mu1_dot iterate
    if (options.initial_mu1_dot)
        for (std::size_t i = 0; i < n; ++i)
            md[i] = chi[i] > 0.0 ? options.initial_mu1_dot(times[i]) : 0.0;
    std::vector<double> m1(n, 0.0);  // mu1 iterate
    double tail_mass = 0.0;

    // Integrate mu1_dot -> mu1 per the anchoring case split.  Trapezoid
    // in ln t of t * mu1_dot (flat integrand on a log grid).
    auto segment = [&](std::size_t i, std::size_t j) {
        return 0.5 * (times[i] * md[i] + times[j] * md[j]) * (lnt[j] - lnt[i]);
    };
    auto integrate_mu1 = [&]() {
        if (split.p > -1.0) {
            // Cumulative from the bottom of the grid (mu1(t0/4) = 0; the
            // activation ramp keeps the integrand zero there anyway).
            m1[0] = 0.0;
            for (std::size_t i = 1; i < n; ++i)
                m1[i] = m1[i - 1] + segment(i - 1, i);
            tail_mass = 0.0;
            return;
        }
        // Anchor mu1(inf) = 0: mu1(t) = -(int_t^T mu1_dot + fitted tail).
        double tail = 0.0;
        const double sign = md[n - 1] >= 0.0 ? 1.0 : -1.0;
        std::vector<double> ft, fy;
        for (std::size_t i = 0; i < n; ++i) {
            if (times[i] < horizon.T / 31.622776601683793) continue;  // 1.5 decades
            if (md[i] * sign <= 0.0) {
                ft.clear();  // sign change: no asymptotic tail to fit
                break;
            }
            ft.push_back(times[i]);
            fy.push_back(std::fabs(md[i]));
        }
        if (ft.size() >= 8) {
            auto fit = fit_power_log(ft, fy);
            tail = sign * power_log_tail_integral(fit.amplitude(), fit.power,
                                                  fit.log_power, horizon.T);
        }
        tail_mass = std::fabs(tail);
        m1[n - 1] = -tail;
        for (std::size_t i = n - 1; i-- > 0;)
            m1[i] = m1[i + 1] - segment(i, i + 1);
    };
    integrate_mu1();

    MuSolveReport report;
    report.times = times;

    double prev_update = std::numeric_limits<double>::infinity();
    int growths = 0;
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        // Normalized interpolant of the current iterate (design choice:
        // monotone cubic of mu1_dot * t^{-p} against ln t).
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i)
            w[i] = md[i] * std::pow(times[i], -split.p);
        PchipInterpolant wi(lnt, w);
        auto md_at = [&](double s) {
            return wi(std::log(s)) * std::pow(s, split.p);
        };

        std::vector<double> next(n, 0.0);
        double sup_new = 0.0, sup_change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (chi[i] == 0.0) continue;
            const double t = times[i];
            // History over [t/2, t - t^{1-nu}] via u = ln(t - s).
            const double u_lo = (1.0 - split.nu) * lnt[i];
            const double u_hi = std::log(0.5 * t);
            auto f = [&](double u) { return md_at(t - std::exp(u)); };
            const double hist = integrate(f, u_lo, u_hi, 1e-9).value;
            const double rhs = force[i] - m1[i] / t - hist;
            const double target = chi[i] * rhs / denom[i];
            if (!std::isfinite(target))
                throw numerical_error("solve_mu: non-finite Picard target");
            next[i] = (1.0 - options.relaxation) * md[i] +
                      options.relaxation * target;
            sup_change = std::max(sup_change, std::fabs(next[i] - md[i]));
            sup_new = std::max(sup_new, std::fabs(next[i]));
        }
        md = std::move(next);
        integrate_mu1();

        const double update = sup_change / std::max(sup_new, 1e-300);
        report.final_update = update;
        if (update < options.tolerance) {
            ++iter;
            break;
        }
        if (update > prev_update) {
            if (++growths >= 5) {
                char buf[160];
                std::snprintf(buf, sizeof buf,
                              "solve_mu: diverging iteration (sweep %d, "
                              "update %.3e after %.3e)",
                              iter, update, prev_update);
                throw numerical_error(buf);
            }
        } else {
            growths = 0;
        }
        prev_update = update;
    }
    report.iterations = iter;
    report.mu1 = m1;
    report.mu1_dot = md;
    report.tail_mass = tail_mass;
    report.mu.resize(n);
    report.mu_dot.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        report.mu[i] = base.mu(times[i]) + m1[i];
        report.mu_dot[i] = base.mu_dot(times[i]) + md[i];
    }

    // Residual profile of the combined trajectory on the enforced window.
    MuTrajectory combined(report.times, report.mu, report.mu_dot);
    for (std::size_t i = 0; i < n; ++i) {
        if (times[i] < horizon.t0 * (1.0 - 1e-12)) continue;
        report.residual_times.push_back(times[i]);
        report.residual.push_back(eval_nonlocal_residual(ctx, combined, times[i]));
    }
    return report;
}

double check_log_integral(double p0, double t, double t1, int ln_power) {
    if (!(p0 >= 0.5) || !(p0 < 1.0))
        throw domain_error("check_log_integral: need 1/2 <= p0 < 1");
    if (!(t > std::exp(2.0)) || !(t1 > 0.0) || !(t1 <= 0.5 * t))
        throw domain_error("check_log_integral: need t > e^2, 0 < t1 <= t/2");
    if (ln_power != 1 && ln_power != 2)
        throw domain_error("check_log_integral: ln_power must be 1 or 2");
    // Leading-order scale of the regime gamma = 2 p0; the boundary case
    // p0 = 1/2 keeps the pure power-log form with unit amplitude.
    double mu0;
    if (p0 > 0.5 + 1e-12) {
        mu0 = LeadingOrderMu(GammaContext::make(2.0 * p0)).mu(t);
    } else {
        mu0 = std::pow(t, 1.0 - p0) / std::log(t);
    }
    const double delta = mu0 * mu0 / t;       // distance of upper limit from 1
    const double z_lo = t1 / t;
    if (!(delta < 1.0 - z_lo))
        throw domain_error("check_log_integral: window collapsed (mu0^2 too large)");
    // w = ln(1－z) regularizes the (1-z)^{-1} endpoint.
    auto f = [&](double w) {
        const double z = 1.0 - std::exp(w);
        const double lt = std::log(t * z);
        const double lpow = ln_power == 1 ? lt : lt * lt;
        return std::pow(z, -p0) / lpow;
    };
    return integrate(f, std::log(delta), std::log(1.0 - z_lo), 1e-10).value;
}

}  // namespace hmf
