#include "hmf/corrector.hpp"

#include <algorithm>
#include <cmath>

#include "hmf/error.hpp"
#include "hmf/kernels.hpp"
#include "hmf/quadrature.hpp"

namespace hmf {

double projection_denominator() {
    auto f = [](double x) {
        const double z = x / (x * x + 1.0);
        return eval_cutoff(x) * z * z * x;
    };
    // The cutoff vanishes beyond x = 2; split there for the kink.
    return integrate_split(f, 0.0, 3.0, {1.0, 2.0}, 1e-12).value;
}

double eval_M(const GammaContext& ctx, double mu, double t,
              const std::function<double(double)>& phi_plus_psi) {
    (void)ctx;
    if (!(mu > 0.0) || !(t > 0.0))
        throw domain_error("eval_M: need mu > 0 and t > 0");
    if (!phi_plus_psi) throw domain_error("eval_M: missing phi_plus_psi");
    const double edge = std::sqrt(t) / mu;  // cutoff starts here, ends at 2x
    auto f = [&](double rho) {
        const double s = rho * rho + 1.0;
        return eval_cutoff(rho / edge) * 8.0 * rho * rho * rho / (s * s * s) *
               phi_plus_psi(rho);
    };
    std::vector<double> bks;
    for (double b : {1.0, edge})
        if (b > 0.0 && b < 2.0 * edge) bks.push_back(b);
    std::sort(bks.begin(), bks.end());
    return integrate_split(f, 0.0, 2.0 * edge, bks, 1e-10).value;
}

std::function<double(double)> build_Htilde(
    const GammaContext& ctx, double mu_bar0, double t,
    std::function<double(double)> phi_plus_psi, double M_value) {
    (void)ctx;
    if (!(mu_bar0 > 0.0) || !(t > 0.0))
        throw domain_error("build_Htilde: need mu_bar0 > 0 and t > 0");
    if (!phi_plus_psi) throw domain_error("build_Htilde: missing phi_plus_psi");
    const double edge = std::sqrt(t) / mu_bar0;
    const double proj = mu_bar0 * M_value / projection_denominator();
    return [=, g = std::move(phi_plus_psi)](double rho) {
        double out = 0.0;
        const double eta_slow = eval_cutoff(rho / edge);
        if (eta_slow > 0.0) {
            const double s = rho * rho + 1.0;
            out += mu_bar0 * eta_slow * (-8.0 * rho / (s * s)) * g(rho);
        }
        const double eta_core = eval_cutoff(rho);
        if (eta_core > 0.0) out += proj * eta_core * rho / (rho * rho + 1.0);
        return out;
    };
}

CorrectionProfile::CorrectionProfile(std::vector<double> rho_grid,
                                     std::vector<double> values,
                                     std::vector<double> d_rho, double t_stamp)
    : rho_grid_(std::move(rho_grid)),
      values_(std::move(values)),
      d_rho_(std::move(d_rho)),
      t_(t_stamp) {
    if (rho_grid_.size() < 4 || values_.size() != rho_grid_.size() ||
        d_rho_.size() != rho_grid_.size())
        throw domain_error("CorrectionProfile: need >= 4 matching samples");
    for (std::size_t i = 0; i < rho_grid_.size(); ++i) {
        if (!(rho_grid_[i] > 0.0) || !std::isfinite(values_[i]) ||
            !std::isfinite(d_rho_[i]))
            throw numerical_error("CorrectionProfile: non-finite samples");
    }
    std::vector<double> ln(rho_grid_.size());
    for (std::size_t i = 0; i < ln.size(); ++i) ln[i] = std::log(rho_grid_[i]);
    value_ln_ = PchipInterpolant(ln, values_);
    d_rho_ln_ = PchipInterpolant(ln, d_rho_);
}

double CorrectionProfile::value_at(double rho) const {
    if (!(rho >= 0.0)) throw domain_error("CorrectionProfile: rho < 0");
    const double lo = rho_grid_.front();
    if (rho < lo) {
        const double q = rho / lo;  // cubic vanishing at the origin
        return values_.front() * q * q * q;
    }
    if (rho > rho_grid_.back() * (1.0 + 1e-12))
        throw domain_error("CorrectionProfile: rho beyond the grid");
    return value_ln_(std::log(rho));
}

double CorrectionProfile::d_rho_at(double rho) const {
    if (!(rho >= 0.0)) throw domain_error("CorrectionProfile: rho < 0");
    const double lo = rho_grid_.front();
    if (rho < lo) {
        const double q = rho / lo;  // quadratic: derivative of a cubic
        return d_rho_.front() * q * q;
    }
    if (rho > rho_grid_.back() * (1.0 + 1e-12))
        throw domain_error("CorrectionProfile: rho beyond the grid");
    return d_rho_ln_(std::log(rho));
}

CorrectionProfile solve_Phi_e(const std::function<double(double)>& Htilde,
                              double rho_max, double t_stamp,
                              double points_per_decade, double rho_min) {
    if (!(points_per_decade >= 32.0))
        throw domain_error("solve_Phi_e: need >= 32 points per decade");
    if (!Htilde) throw domain_error("solve_Phi_e: missing source");
    if (!(rho_min > 0.0) || !(rho_max > 10.0 * rho_min))
        throw domain_error("solve_Phi_e: need 0 < rho_min, rho_max > 10 rho_min");
    // Reject sources that do not vanish at the origin: H = O(rho) is
    // required for the kernel integrals to converge.
    {
        const double h6 = Htilde(1e-6), h7 = Htilde(1e-7);
        if (std::fabs(h6) > 1e-300 && std::fabs(h7) > 0.5 * std::fabs(h6))
            throw domain_error("solve_Phi_e: source does not vanish at rho = 0");
    }

    const auto grid = log_spaced(rho_min, rho_max, points_per_decade);
    const std::size_t n = grid.size();
    std::vector<double> values(n), deriv(n);

    auto f1 = [&](double x) { return Htilde(x) * eval_kernels_ZZt(x).Z * x; };
    auto f2 = [&](double x) { return Htilde(x) * eval_kernels_ZZt(x).Zt * x; };

    KahanSum I1, I2;  // cumulative int_0^rho in one compensated pass
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        // Per-segment fixed Kronrod panels: the log grid keeps segments a
        // small fraction of rho, where one panel is accurate to roundoff;
        // an adaptive relative target would over-refine near-zero segments.
        I1.add(integrate_panel(f1, prev, grid[i]).value);
        I2.add(integrate_panel(f2, prev, grid[i]).value);
        prev = grid[i];
        const auto k = eval_kernels_ZZt(grid[i]);
        values[i] = k.Zt * I1.value() - k.Z * I2.value();
        deriv[i] = k.dZt * I1.value() - k.dZ * I2.value();
    }
    return CorrectionProfile(grid, values, deriv, t_stamp);
}

}  // namespace hmf
