#pragma once
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "hmf/corrector.hpp"
#include "hmf/heat4d.hpp"
#include "hmf/mu_dynamics.hpp"
#include "hmf/numerics.hpp"

namespace hmf {

// ---------------------------------------------------------------------------
// Finite-difference application of the evolution error operator
//   E[v] = -v_t + v_rr + v_r/r - sin(2v)/(2 r^2)
// to an arbitrary evaluable field v(r, t).
// ---------------------------------------------------------------------------

struct OperatorValue {
    double value = 0.0;
    double error_estimate = 0.0;  // from stencil halving (r and t combined)
};

struct StencilOptions {
    // Radial step h = r_step_fraction * min(r, sqrt(t)): proportional to r
    // near the origin (the stencil never crosses r = 0) and to the
    // self-similar scale sqrt(t) far out.
    double r_step_fraction = 0.02;
    // Time step k = t_step_fraction * t.
    double t_step_fraction = 0.005;
};

// 5-point 4th-order differences in r (Fornberg weights on the actual
// nodes), centered 2nd-order differences in t, each evaluated at a full
// and a half step; the returned value Richardson-extrapolates each pair
// and the error estimate is the halving gap of the un-extrapolated
// values.  Throws domain_error for r <= 0 or on non-finite field values.
// Note sin(2v) has period pi, so the operator is invariant under shifting
// the field by pi; fields that plateau at pi are best passed shifted to
// keep the plateau at 0, where finite differencing is well conditioned.
OperatorValue apply_error_operator(const std::function<double(double, double)>& v,
                                   double r, double t, StencilOptions opt = {});

// Same stencils applied to the linear part only:
//   -v_t + v_rr + v_r/r - v/r^2.
// For a Duhamel solution driven by a source S this defect equals -S.
OperatorValue eval_heat_defect(const std::function<double(double, double)>& v,
                               double r, double t, StencilOptions opt = {});

// ---------------------------------------------------------------------------
// Closed forms for the leading approximation v_* = eta(z) Q_mu and the
// algebraic decomposition of E[v_*].
// ---------------------------------------------------------------------------

// Q_mu(r) = pi - 2 arctan(r/mu), evaluated without cancellation as
// 2 arctan(mu/r); Q(0) = pi.
double Q_profile(double r, double mu);

// eta(r/sqrt(t)) * Q_mu(r) with mu = model.mu(t).
double eval_v_star(const MuModel& mu, double r, double t);

// The exact grouped decomposition of E[v_*]:
//   E1   : scale-drift term    mu^{-1} mu_dot eta(z) rho dQ/drho
//   E21  : cutoff-derivative terms carrying the leading 2/rho profile tail
//   E22  : cutoff-derivative terms carrying the (profile - 2/rho) remainder
//   trig : eta sin(2Q)/(2r^2) - sin(2 eta Q)/(2r^2)
// E21, E22, trig vanish identically outside the transition annulus
// sqrt(t) <= r <= 2 sqrt(t); E1 vanishes with mu_dot.
struct FirstErrorTerms {
    double E1 = 0.0;
    double E21 = 0.0;
    double E22 = 0.0;
    double trig_remainder = 0.0;
    double total() const { return E1 + E21 + E22 + trig_remainder; }
};
FirstErrorTerms eval_first_error_terms(const MuModel& mu, double r, double t);

// Duhamel sources for the two non-local corrections, as functions of the
// evaluation radius and the source time s:
//   slow_source_1 = r^{-1} E1  = -2 mu_dot(s) / (mu(s)^2 + r^2) * eta(r/sqrt(s))
//   slow_source_2 = r^{-1} (E21 + E22)   (supported in the annulus).
double slow_source_1(const MuModel& mu, double r, double s);
double slow_source_2(const MuModel& mu, double r, double s);

// phi_i(r, t): 4D-radial heat solutions driven by the slow sources from
// time t0/2; the corrections entering the approximation are Phi_i = r phi_i.
struct VarphiCorrections {
    double phi1 = 0.0;
    double phi2 = 0.0;
    double total() const { return phi1 + phi2; }
};
VarphiCorrections eval_varphi_corrections(const MuModel& mu, double r, double t,
                                          double t0, double rel_tol = 1e-8);

// ---------------------------------------------------------------------------
// The assembled approximation
//   v1 = eta(z) Q_mu + Phi_1 + Phi_2 + Psi_* + eta(4z) Phi_e
// with per-time-slice caches for the elliptic correction and the slow
// forcing, and a (r, t)-keyed cache for the expensive components.
// ---------------------------------------------------------------------------

struct AnsatzOptions {
    double t0 = 100.0;                    // corrections start at t0/2
    double duhamel_rel_tol = 1e-6;        // per-evaluation quadrature target
    double psi_rel_tol = 1e-9;
    double g_points_per_decade = 24.0;    // slow-forcing interpolant density
    double g_rho_min = 0.05;              // constant continuation below this
    double phi_e_points_per_decade = 384.0;
    double phi_e_time_step_fraction = 0.01;  // d/dt Phi_e centered step
};

struct AnsatzComponents {
    double core = 0.0;        // eta(z) Q_mu
    double Phi1 = 0.0;        // r phi_1
    double Phi2 = 0.0;        // r phi_2
    double Psi_star = 0.0;    // r psi_*
    double Phi_e_term = 0.0;  // eta(4z) Phi_e(r/mu, t)
    double v1() const { return core + Phi1 + Phi2 + Psi_star + Phi_e_term; }
};

// The exact regrouping of E[v1] at the base scale (no extra scale
// perturbation): time-derivative leak of the elliptic correction, the
// kernel-projection term restored by the orthogonalized source, the cutoff
// mismatch terms, and the quadratic-and-higher trig remainder.
struct GroupedError {
    double dt_phi_e_term = 0.0;    // -eta(4z) d/dt [Phi_e(r/mu(t), t)]
    double projection_term = 0.0;  // +eta(4z) mu^{-1} M eta(rho) Z(rho) / D
    double eta_mismatch = 0.0;     // cutoff-derivative and cutoff-gap terms
    double trig_term = 0.0;        // quadratic-and-higher trig remainder
    double total() const {
        return dt_phi_e_term + projection_term + eta_mismatch + trig_term;
    }
};

class AnsatzBundle {
  public:
    // The scale model must stay alive for the bundle's lifetime and cover
    // [t0/2, horizon] including finite-difference slack.
    AnsatzBundle(const GammaContext& ctx, const MuModel& mu,
                 AnsatzOptions opt = {});

    double v_star(double r, double t) const;
    AnsatzComponents components(double r, double t) const;
    double v1(double r, double t) const;
    GroupedError grouped_error(double r, double t) const;

    // Orthogonality functional and elliptic-correction profile of the
    // time slice at t (built and cached on first use).
    double M_at(double t) const;
    std::shared_ptr<const CorrectionProfile> profile_at(double t) const;

    const GammaContext& ctx() const { return ctx_; }
    const MuModel& mu_model() const { return *mu_; }
    const AnsatzOptions& options() const { return opt_; }

  private:
    struct TimeSlice {
        double mu = 0.0;
        double edge = 0.0;       // sqrt(t)/mu
        double g_lo = 0.0;       // interpolant range in rho
        double g_hi = 0.0;
        PchipInterpolant g_ln;   // slow forcing vs ln(rho)
        double M = 0.0;
        std::shared_ptr<CorrectionProfile> profile;
        double g(double rho) const;  // clamped evaluation
    };
    const TimeSlice& slice(double t) const;

    GammaContext ctx_;
    const MuModel* mu_;
    AnsatzOptions opt_;
    mutable std::mutex mutex_;
    mutable std::map<double, TimeSlice> slices_;
    mutable std::map<std::pair<double, double>, AnsatzComponents> components_;
};

// ---------------------------------------------------------------------------
// Refinement of the scale trajectory against the true orthogonality
// functional: damped outer iterations, each solving the linearized memory
// equation forced by the measured functional of the previous iterate.
// ---------------------------------------------------------------------------

// True orthogonality functional at the model's own scale: the slow forcing
// is (phi_1 + phi_2 + psi_*) evaluated at r = mu(t) rho from full Duhamel
// quadrature (interpolated on a log grid of the given density).
double eval_M_true(const GammaContext& ctx, const MuModel& mu, double t,
                   const AnsatzOptions& opt = {});

struct OrthogonalityRefineResult {
    MuSolveReport report;                // final solve
    std::vector<double> sample_times;    // where M was measured (last pass)
    std::vector<double> M_before;        // M of the iterate before that pass
};

OrthogonalityRefineResult refine_mu_for_orthogonality(
    const GammaContext& ctx, const SplitParameters& split,
    const MuHorizon& horizon, int outer_iterations = 2,
    double samples_per_decade = 2.0, AnsatzOptions opt = {});

}  // namespace hmf
