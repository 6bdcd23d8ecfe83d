#include <doctest.h>

#include <cmath>
#include <vector>

#include "hmf/error.hpp"
#include "hmf/kernels.hpp"
#include "hmf/numerics.hpp"

using namespace hmf;

namespace {

// Independent potential for the linearized operator, written as the single
// rational expression (rho^4 + 1 - 6 rho^2) / (rho^2 (rho^2+1)^2).
double potential_oracle(double rho) {
    const double r2 = rho * rho;
    const double d = r2 + 1.0;
    return (r2 * r2 + 1.0 - 6.0 * r2) / (r2 * d * d);
}

// Brute-force high-order application of L f = f'' + f'/rho - W f via a
// 7-point uniform central stencil (order-6 truncation).
template <class F>
double L_oracle(F&& f, double rho) {
    const double h = 5e-3 * std::max(rho, 0.5);
    std::vector<double> nodes;
    for (int k = -3; k <= 3; ++k) nodes.push_back(rho + k * h);
    auto w = fd_weights(rho, nodes, 2);
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        d1 += w[1][j] * f(nodes[j]);
        d2 += w[2][j] * f(nodes[j]);
    }
    return d2 + d1 / rho - potential_oracle(rho) * f(rho);
}

// Richardson-extrapolated central difference quotient (order-4 accurate).
template <class F>
double fd_derivative(F&& f, double x, double h) {
    auto cd = [&](double hh) { return (f(x + hh) - f(x - hh)) / (2.0 * hh); };
    return (4.0 * cd(0.5 * h) - cd(h)) / 3.0;
}

}  // namespace

TEST_CASE("steady state profile: frozen values") {
    auto q = eval_Q(1.0, 1.0);
    CHECK(q.Q == doctest::Approx(M_PI / 2).epsilon(1e-14));
    CHECK(q.dQ_drho == doctest::Approx(-1.0).epsilon(1e-14));

    // rho = 2 via mu = 0.5, r = 1
    auto q2 = eval_Q(0.5, 1.0);
    CHECK(q2.Q == doctest::Approx(0.9272952180016122).epsilon(1e-14));
    CHECK(q2.dQ_drho == doctest::Approx(-0.4).epsilon(1e-14));

    CHECK(eval_Q(0.01, 0.0).Q == doctest::Approx(M_PI).epsilon(1e-15));
    CHECK_THROWS_AS(eval_Q(-1.0, 1.0), domain_error);
}

TEST_CASE("trig closed forms: frozen values and agreement with direct trig") {
    auto t2 = eval_trig_Q(2.0);
    CHECK(t2.sin_2Q == doctest::Approx(24.0 / 25.0).epsilon(1e-14));
    CHECK(t2.cos_2Q_minus_1 == doctest::Approx(-32.0 / 25.0).epsilon(1e-14));

    // Against direct trigonometry of Q itself at a well-conditioned point.
    const double rho = 2.0;
    const double Q = M_PI - 2.0 * std::atan(rho);
    CHECK(std::fabs(t2.sin_2Q - std::sin(2.0 * Q)) < 1e-13);
    CHECK(std::fabs(t2.cos_2Q_minus_1 - (std::cos(2.0 * Q) - 1.0)) < 1e-13);

    // Property: pointwise agreement over six decades of rho.
    for (double x : log_spaced(1e-3, 1e3, 16)) {
        auto tv = eval_trig_Q(x);
        const double Qx = M_PI - 2.0 * std::atan(x);
        CHECK(std::fabs(tv.sin_2Q - std::sin(2.0 * Qx)) < 1e-12);
        CHECK(std::fabs(tv.cos_2Q_minus_1 - (std::cos(2.0 * Qx) - 1.0)) < 1e-12);
    }
}

TEST_CASE("cutoff: plateau, decay and C^2 smoothness") {
    CHECK(eval_cutoff(0.0) == 1.0);
    CHECK(eval_cutoff(1.0) == 1.0);
    CHECK(eval_cutoff(1.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(eval_cutoff(2.0) == 0.0);
    CHECK(eval_cutoff(5.0) == 0.0);

    // Derivatives vanish at the junctions (C^2 gluing).
    for (double x : {1.0 + 1e-9, 2.0 - 1e-9}) {
        CHECK(std::fabs(eval_cutoff(x, 1)) < 1e-7);
        CHECK(std::fabs(eval_cutoff(x, 2)) < 1e-6);
    }

    // Monotone decreasing on the transition, values in [0, 1].
    double prev = 1.0;
    for (double x = 1.0; x <= 2.0; x += 1e-3) {
        double v = eval_cutoff(x);
        CHECK(v <= prev + 1e-15);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        prev = v;
    }

    // deriv = 1, 2 agree with difference quotients of deriv = 0, 1.
    for (double x : {1.1, 1.37, 1.5, 1.83, 1.97}) {
        double fd1 = fd_derivative([](double s) { return eval_cutoff(s, 0); }, x, 1e-4);
        double fd2 = fd_derivative([](double s) { return eval_cutoff(s, 1); }, x, 1e-4);
        CHECK(eval_cutoff(x, 1) == doctest::Approx(fd1).epsilon(1e-9));
        CHECK(eval_cutoff(x, 2) == doctest::Approx(fd2).epsilon(1e-9));
    }
    CHECK_THROWS_AS(eval_cutoff(1.0, 3), domain_error);
}

TEST_CASE("tail remainders of Q: frozen values, series/direct continuity") {
    // 2*(atan(1) - 1)
    CHECK(Q_tail_remainder(1.0) == doctest::Approx(-0.4292036732051034).epsilon(1e-14));

    // Long-double oracle across the series switch at rho = 10.
    for (double rho : {2.0, 9.5, 10.5, 30.0, 1e3, 2e4}) {
        long double x = 1.0L / static_cast<long double>(rho);
        long double ref = 2.0L * (std::atan(x) - x);
        CHECK(Q_tail_remainder(rho) ==
              doctest::Approx(static_cast<double>(ref)).epsilon(1e-9));
    }
    // Continuity across the branch switch.
    CHECK(Q_tail_remainder(10.0 - 1e-9) ==
          doctest::Approx(Q_tail_remainder(10.0 + 1e-9)).epsilon(1e-10));

    // dQ/drho + 2/rho^2 = 2 / (rho^2 (rho^2+1)), exact identity.
    for (double rho : {0.5, 1.0, 7.0, 120.0}) {
        long double r2 = static_cast<long double>(rho) * rho;
        long double ref = -2.0L / (r2 + 1.0L) + 2.0L / r2;
        CHECK(dQ_tail_remainder(rho) ==
              doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
    }
}

TEST_CASE("homogeneous kernels: frozen values and Wronskian identity") {
    auto k1 = eval_kernels_ZZt(1.0);
    CHECK(k1.Z == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(k1.Zt == doctest::Approx(0.0).epsilon(1e-14));

    // Z Zt' - Z' Zt = 1/rho over six decades.
    for (double rho : log_spaced(1e-3, 1e3, 64)) {
        auto k = eval_kernels_ZZt(rho);
        double w = k.Z * k.dZt - k.dZ * k.Zt;
        CHECK(std::fabs(rho * w - 1.0) < 1e-12);
    }

    // Derivative fields agree with difference quotients of the values.
    for (double rho : {0.02, 0.7, 1.3, 55.0}) {
        double h = 1e-3 * std::max(rho, 0.1);
        double fdZ = fd_derivative(
            [](double s) { return eval_kernels_ZZt(s).Z; }, rho, h);
        double fdZt = fd_derivative(
            [](double s) { return eval_kernels_ZZt(s).Zt; }, rho, h);
        CHECK(eval_kernels_ZZt(rho).dZ == doctest::Approx(fdZ).epsilon(1e-9));
        CHECK(eval_kernels_ZZt(rho).dZt == doctest::Approx(fdZt).epsilon(1e-9));
    }

    // Small-rho branch: leading behaviour and Wronskian consistency.
    auto ks = eval_kernels_ZZt(1e-9);
    CHECK(ks.Zt == doctest::Approx(-0.5e9).epsilon(1e-6));
    CHECK(1e-9 * (ks.Z * ks.dZt - ks.dZ * ks.Zt) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("apply_linearized_L annihilates both kernels at second order") {
    auto run = [](int n) {
        RadialField f;
        RadialField g;
        for (int i = 0; i <= n; ++i) {
            double rho = 0.5 + 1.5 * static_cast<double>(i) / n;
            f.rho.push_back(rho);
            g.rho.push_back(rho);
            auto k = eval_kernels_ZZt(rho);
            f.value.push_back(k.Z);
            g.value.push_back(k.Zt);
        }
        auto Lf = apply_linearized_L(f);
        auto Lg = apply_linearized_L(g);
        double sup = 0.0;
        for (std::size_t i = 0; i < Lf.value.size(); ++i) {
            sup = std::max(sup, std::fabs(Lf.value[i]));
            sup = std::max(sup, std::fabs(Lg.value[i]));
        }
        return sup;
    };
    double e1 = run(100);
    double e2 = run(200);
    double order = std::log2(e1 / e2);
    CHECK(e2 < 5e-3);
    CHECK(order >= 1.9);
}

TEST_CASE("apply_linearized_L exact on low-degree polynomials") {
    // L(rho) = 8 rho/(rho^2+1)^2 and L(rho^2) = 3 + 8 rho^2/(rho^2+1)^2
    // exactly; second-order stencils are exact on quadratics, so only
    // roundoff remains.
    RadialField lin, quad;
    for (double rho : log_spaced(0.2, 5.0, 40)) {
        lin.rho.push_back(rho);
        lin.value.push_back(rho);
        quad.rho.push_back(rho);
        quad.value.push_back(rho * rho);
    }
    auto Ll = apply_linearized_L(lin);
    auto Lq = apply_linearized_L(quad);
    for (std::size_t i = 0; i < Ll.rho.size(); ++i) {
        double rho = Ll.rho[i];
        double d = rho * rho + 1.0;
        CHECK(Ll.value[i] == doctest::Approx(8.0 * rho / (d * d)).epsilon(1e-9));
        CHECK(Lq.value[i] ==
              doctest::Approx(3.0 + 8.0 * rho * rho / (d * d)).epsilon(1e-9));
    }
}

TEST_CASE("apply_linearized_L agrees with brute-force high-order stencils") {
    auto f = [](double rho) { return rho * std::exp(-rho * rho); };
    RadialField field;
    const int n = 4000;
    for (int i = 0; i <= n; ++i) {
        double rho = 0.05 * std::pow(6.0 / 0.05, static_cast<double>(i) / n);
        field.rho.push_back(rho);
        field.value.push_back(f(rho));
    }
    auto Lf = apply_linearized_L(field);
    double sup_ref = 0.0;
    for (double rho : {0.1, 0.2, 0.5, 0.8, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0})
        sup_ref = std::max(sup_ref, std::fabs(L_oracle(f, rho)));
    // Compare at the grid node nearest each of 10 sample radii.
    for (double rho : {0.1, 0.2, 0.5, 0.8, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0}) {
        std::size_t best = 0;
        for (std::size_t i = 0; i < field.rho.size(); ++i)
            if (std::fabs(field.rho[i] - rho) < std::fabs(field.rho[best] - rho))
                best = i;
        double ref = L_oracle(f, field.rho[best]);
        CHECK(std::fabs(Lf.value[best] - ref) < 1e-4 * sup_ref);
    }
}

TEST_CASE("apply_linearized_L input validation") {
    RadialField f;
    f.rho = {0.1, 0.2, 0.3};
    f.value = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(apply_linearized_L(f), domain_error);  // too few points
    f.rho = {0.1, 0.2, 0.3, 0.25};
    f.value = {1.0, 2.0, 3.0, 4.0};
    CHECK_THROWS_AS(apply_linearized_L(f), domain_error);  // not increasing
    f.rho = {-0.1, 0.2, 0.3, 0.4};
    CHECK_THROWS_AS(apply_linearized_L(f), domain_error);  // not positive
}

TEST_CASE("initial data: center value, core gradient, tail decay") {
    const double gamma = 1.5, mu = 0.01, r0 = 10.0;
    auto v0 = build_initial_data(gamma, mu, r0);
    CHECK(v0(0.0) == doctest::Approx(M_PI).epsilon(1e-15));

    // dv0/dr(0+) = -2/mu + 1 (cutoff flat at 0; tail contributes slope 1).
    double h = 1e-7 * mu;
    double slope = (v0(h) - v0(0.0)) / h;
    CHECK(slope == doctest::Approx(-2.0 / mu + 1.0).epsilon(1e-5));

    // Far field ~ r^{1-gamma}: the core cutoff has fully shut off.
    for (double r : {25.0, 50.0, 100.0}) {
        double ratio = v0(r) / std::pow(r, 1.0 - gamma);
        CHECK(ratio == doctest::Approx(1.0).epsilon(0.01));
    }

    CHECK_THROWS_AS(build_initial_data(1.0, 0.01, 1.0), domain_error);
    CHECK_THROWS_AS(build_initial_data(1.5, -0.01, 1.0), domain_error);
}
