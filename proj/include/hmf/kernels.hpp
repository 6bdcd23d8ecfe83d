#pragma once
#include <vector>

namespace hmf {

// Equivariant steady state Q_mu(r) = pi - 2*atan(r/mu) and its scaled-radius
// derivative dQ/drho evaluated at rho = r/mu.
struct QValue {
    double Q;
    double dQ_drho;  // -2 / (rho^2 + 1)
};
QValue eval_Q(double mu, double r);

// Closed forms for the trigonometric combinations of Q that appear in the
// equation's nonlinearity, as functions of rho = r/mu:
//   sin(2Q)    = 4 rho (rho^2 - 1) / (rho^2 + 1)^2
//   cos(2Q)-1  = -8 rho^2 / (rho^2 + 1)^2
struct TrigQ {
    double sin_2Q;
    double cos_2Q_minus_1;
};
TrigQ eval_trig_Q(double rho);

// C^2 cutoff: 1 on [0,1], 0 on [2,inf), quintic smoothstep in between.
// deriv = 0, 1, 2 selects the function or one of its derivatives.
double eval_cutoff(double x, int deriv = 0);

// Cancellation-safe remainders of Q against its far-field tail 2/rho:
//   Q(rho) - 2/rho          = 2*(atan(1/rho) - 1/rho)
//   dQ/drho + 2/rho^2       = 2 / (rho^2 (rho^2 + 1))      (exact identity)
double Q_tail_remainder(double rho);
double dQ_tail_remainder(double rho);

// Homogeneous solutions of the linearized operator
//   L = d^2/drho^2 + (1/rho) d/drho - W(rho),
//   W(rho) = (rho^4 + 1 - 6 rho^2) / (rho^2 (rho^2+1)^2) = 1/rho^2 - 8/(rho^2+1)^2:
//   Z(rho)  = rho / (rho^2 + 1)                       (bounded, Z ~ rho at 0)
//   Zt(rho) = (rho^4 + 4 rho^2 ln rho - 1) / (2 rho (rho^2 + 1))   (growing)
// with Wronskian Z*Zt' - Z'*Zt = 1/rho.  Below rho = 1e-8 the growing
// solution switches to its leading term -1/(2 rho) to avoid underflow in
// the quotient-rule derivative.
struct KernelValues {
    double Z, dZ;
    double Zt, dZt;
};
KernelValues eval_kernels_ZZt(double rho);

double linearized_potential(double rho);  // W(rho) above

// A scalar field sampled on a strictly increasing radial grid.
struct RadialField {
    std::vector<double> rho;
    std::vector<double> value;
};

// Second-order finite-difference application of L on the field's own
// (possibly nonuniform) grid: 3-point interior stencils, 4-point one-sided
// stencils at the two boundary nodes.  Requires at least 4 grid points.
RadialField apply_linearized_L(const RadialField& f);

// Initial datum v0(r) = eta(r/r0) Q_{mu_init}(r) + r (1+r^2)^(-gamma/2):
// a near-soliton core glued to a prescribed power-law tail.
struct InitialData {
    double gamma;
    double mu_init;
    double r0;
    double operator()(double r) const;
};
InitialData build_initial_data(double gamma, double mu_init, double r0);

}  // namespace hmf
