#pragma once
#include <functional>
#include <vector>

#include "hmf/heat4d.hpp"
#include "hmf/numerics.hpp"

namespace hmf {

// Weighted projection denominator int_0^3 eta(x) Z(x)^2 x dx with the
// standard cutoff eta and the regular kernel Z = rho/(rho^2+1).
double projection_denominator();

// Orthogonality functional
//   M(t) = int_0^inf eta(mu rho / sqrt t) (8 rho^3/(rho^2+1)^3)
//          (phi+psi)(rho) drho,
// the weighted pairing of the slow forcing with the regular kernel.  The
// cutoff truncates the integrand at rho = 2 sqrt(t)/mu.
double eval_M(const GammaContext& ctx, double mu, double t,
              const std::function<double(double)>& phi_plus_psi);

// Projected source for the elliptic correction:
//   H(rho) = mu0 eta(mu0 rho/sqrt t) (-8 rho/(rho^2+1)^2) (phi+psi)(rho)
//          + mu0 M eta(rho) Z(rho) / projection_denominator().
// With M chosen as eval_M of the same phi+psi, the result is orthogonal
// to Z in the x dx pairing.  Terms with a vanishing cutoff factor are
// skipped without evaluating phi_plus_psi there.
std::function<double(double)> build_Htilde(
    const GammaContext& ctx, double mu_bar0, double t,
    std::function<double(double)> phi_plus_psi, double M_value);

// Solved elliptic correction on a log grid: values of Phi_e and its rho
// derivative, interpolable in between (cubic decay continuation below the
// first node, where Phi_e = O(rho^3)).  Immutable after construction.
class CorrectionProfile {
  public:
    CorrectionProfile(std::vector<double> rho_grid, std::vector<double> values,
                      std::vector<double> d_rho, double t_stamp);

    const std::vector<double>& rho_grid() const { return rho_grid_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& d_rho() const { return d_rho_; }
    double t() const { return t_; }

    double value_at(double rho) const;
    double d_rho_at(double rho) const;

  private:
    std::vector<double> rho_grid_, values_, d_rho_;
    double t_ = 0.0;
    PchipInterpolant value_ln_, d_rho_ln_;  // vs ln(rho)
};

// Variation of parameters against the kernel pair (Z, Z~) with Wronskian
// 1/rho:  Phi_e(rho) = Z~(rho) I1(rho) - Z(rho) I2(rho),
//         I1 = int_0^rho H Z x dx,  I2 = int_0^rho H Z~ x dx,
// accumulated in one compensated pass of per-segment quadratures; the
// derivative uses the same integrals against the kernel derivatives.
// The source must vanish at the origin (H = O(rho)); a source that stays
// bounded away from 0 as rho -> 0 is rejected with a domain error.
CorrectionProfile solve_Phi_e(const std::function<double(double)>& Htilde,
                              double rho_max, double t_stamp = 0.0,
                              double points_per_decade = 768.0,
                              double rho_min = 1e-4);

}  // namespace hmf
