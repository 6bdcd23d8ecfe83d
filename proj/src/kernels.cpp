#include "hmf/kernels.hpp"

#include <cmath>

#include "hmf/error.hpp"
#include "hmf/numerics.hpp"

namespace hmf {

QValue eval_Q(double mu, double r) {
    if (!(mu > 0.0) || !(r >= 0.0))
        throw domain_error("eval_Q: need mu > 0, r >= 0");
    const double rho = r / mu;
    return {M_PI - 2.0 * std::atan(rho), -2.0 / (rho * rho + 1.0)};
}

TrigQ eval_trig_Q(double rho) {
    if (!(rho >= 0.0)) throw domain_error("eval_trig_Q: need rho >= 0");
    const double d = rho * rho + 1.0;
    return {4.0 * rho * (rho * rho - 1.0) / (d * d),
            -8.0 * rho * rho / (d * d)};
}

double eval_cutoff(double x, int deriv) {
    if (deriv < 0 || deriv > 2)
        throw domain_error("eval_cutoff: deriv must be 0, 1 or 2");
    if (x <= 1.0) return deriv == 0 ? 1.0 : 0.0;
    if (x >= 2.0) return 0.0;
    const double u = x - 1.0;
    switch (deriv) {
        case 0: return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
        case 1: return -30.0 * u * u * (u - 1.0) * (u - 1.0);
        default: return -60.0 * u * (2.0 * u - 1.0) * (u - 1.0);
    }
}

double Q_tail_remainder(double rho) {
    if (!(rho > 0.0)) throw domain_error("Q_tail_remainder: need rho > 0");
    if (rho <= 10.0) return 2.0 * (std::atan(1.0 / rho) - 1.0 / rho);
    // atan(x) - x = -x^3/3 + x^5/5 - ... ; terms through x^13 leave a
    // relative truncation error below 1e-12 for rho >= 10.
    const double x2 = 1.0 / (rho * rho);
    const double x3 = x2 / rho;
    return 2.0 * x3 * (-1.0 / 3.0 +
                       x2 * (1.0 / 5.0 +
                             x2 * (-1.0 / 7.0 +
                                   x2 * (1.0 / 9.0 +
                                         x2 * (-1.0 / 11.0 + x2 / 13.0)))));
}

double dQ_tail_remainder(double rho) {
    if (!(rho > 0.0)) throw domain_error("dQ_tail_remainder: need rho > 0");
    return 2.0 / (rho * rho * (rho * rho + 1.0));
}

KernelValues eval_kernels_ZZt(double rho) {
    if (!(rho > 0.0)) throw domain_error("eval_kernels_ZZt: need rho > 0");
    const double r2 = rho * rho;
    const double d = r2 + 1.0;
    KernelValues out;
    out.Z = rho / d;
    out.dZ = (1.0 - r2) / (d * d);
    if (rho < 1e-8) {
        // Leading behaviour; the quotient-rule denominator would underflow.
        out.Zt = -0.5 / rho;
        out.dZt = 0.5 / (rho * rho);
        return out;
    }
    const double lnr = std::log(rho);
    const double num = r2 * r2 + 4.0 * r2 * lnr - 1.0;
    const double den = 2.0 * rho * d;
    const double dnum = 4.0 * rho * (r2 + 2.0 * lnr + 1.0);
    const double dden = 2.0 * (3.0 * r2 + 1.0);
    out.Zt = num / den;
    out.dZt = (dnum * den - num * dden) / (den * den);
    return out;
}

double linearized_potential(double rho) {
    if (!(rho > 0.0)) throw domain_error("linearized_potential: need rho > 0");
    const double d = rho * rho + 1.0;
    return 1.0 / (rho * rho) - 8.0 / (d * d);
}

RadialField apply_linearized_L(const RadialField& f) {
    const std::size_t n = f.rho.size();
    if (n < 4 || f.value.size() != n)
        throw domain_error("apply_linearized_L: need >= 4 matching grid points");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(f.rho[i] > 0.0))
            throw domain_error("apply_linearized_L: grid must be positive");
        if (i > 0 && !(f.rho[i] > f.rho[i - 1]))
            throw domain_error("apply_linearized_L: grid must increase");
    }
    RadialField out;
    out.rho = f.rho;
    out.value.assign(n, 0.0);
    auto apply_stencil = [&](std::size_t center, std::size_t first,
                             std::size_t count) {
        std::vector<double> nodes(f.rho.begin() + static_cast<long>(first),
                                  f.rho.begin() + static_cast<long>(first + count));
        auto w = fd_weights(f.rho[center], nodes, 2);
        double d1 = 0.0, d2 = 0.0;
        for (std::size_t j = 0; j < count; ++j) {
            d1 += w[1][j] * f.value[first + j];
            d2 += w[2][j] * f.value[first + j];
        }
        const double rho = f.rho[center];
        out.value[center] = d2 + d1 / rho - linearized_potential(rho) * f.value[center];
    };
    // One-sided boundary stencils use an extra node: a 5-point one-sided
    // second derivative is third-order accurate, so the boundary error does
    // not dominate the second-order interior stencils.
    const std::size_t endw = std::min<std::size_t>(5, n);
    apply_stencil(0, 0, endw);
    for (std::size_t i = 1; i + 1 < n; ++i) apply_stencil(i, i - 1, 3);
    apply_stencil(n - 1, n - endw, endw);
    return out;
}

double InitialData::operator()(double r) const {
    if (!(r >= 0.0)) throw domain_error("InitialData: need r >= 0");
    const double core = eval_cutoff(r / r0) * eval_Q(mu_init, r).Q;
    const double tail = r * std::pow(1.0 + r * r, -0.5 * gamma);
    return core + tail;
}

InitialData build_initial_data(double gamma, double mu_init, double r0) {
    if (!(gamma > 1.0))
        throw domain_error("build_initial_data: need gamma > 1");
    if (!(mu_init > 0.0) || !(r0 > 0.0))
        throw domain_error("build_initial_data: need mu_init > 0, r0 > 0");
    return InitialData{gamma, mu_init, r0};
}

}  // namespace hmf
