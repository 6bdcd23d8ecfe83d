#include "hmf/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <Eigen/Dense>

#include "hmf/error.hpp"

namespace hmf {

std::vector<std::vector<double>> fd_weights(double x0,
                                            const std::vector<double>& nodes,
                                            int max_order) {
    const int n = static_cast<int>(nodes.size());
    if (n < max_order + 1)
        throw domain_error("fd_weights: need at least order+1 nodes");
    // B. Fornberg, "Generation of finite difference formulas on arbitrarily
    // spaced grids", Math. Comp. 51 (1988).
    const int m = max_order;
    std::vector<std::vector<double>> c(m + 1, std::vector<double>(n, 0.0));
    double c1 = 1.0;
    double c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        int mn = std::min(i, m);
        double c2 = 1.0;
        double c5 = c4;
        c4 = nodes[i] - x0;
        for (int j = 0; j < i; ++j) {
            double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

PchipInterpolant::PchipInterpolant(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw domain_error("PchipInterpolant: need >= 2 matching nodes");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1]))
            throw domain_error("PchipInterpolant: abscissa must increase");
    d_.assign(n, 0.0);
    std::vector<double> h(n - 1), slope(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        slope[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    if (n == 2) {
        d_[0] = d_[1] = slope[0];
        return;
    }
    // Interior derivatives: weighted harmonic mean where slopes agree in
    // sign, zero otherwise (Fritsch-Carlson monotone rule).
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (slope[i - 1] * slope[i] <= 0.0) {
            d_[i] = 0.0;
        } else {
            double w1 = 2.0 * h[i] + h[i - 1];
            double w2 = h[i] + 2.0 * h[i - 1];
            d_[i] = (w1 + w2) / (w1 / slope[i - 1] + w2 / slope[i]);
        }
    }
    // One-sided ends (shape-preserving cubic estimate, clipped).
    auto end_slope = [](double h0, double h1, double s0, double s1) {
        double d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
        if (d * s0 <= 0.0) return 0.0;
        if (s0 * s1 < 0.0 && std::fabs(d) > 3.0 * std::fabs(s0))
            return 3.0 * s0;
        return d;
    };
    d_[0] = end_slope(h[0], h[1], slope[0], slope[1]);
    d_[n - 1] = end_slope(h[n - 2], h[n - 3], slope[n - 2], slope[n - 3]);
}

std::size_t PchipInterpolant::interval(double x) const {
    if (x <= x_.front()) return 0;
    if (x >= x_.back()) return x_.size() - 2;
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    return static_cast<std::size_t>(it - x_.begin()) - 1;
}

double PchipInterpolant::operator()(double x) const {
    const std::size_t i = interval(x);
    const double h = x_[i + 1] - x_[i];
    const double s = (x - x_[i]) / h;
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    return h00 * y_[i] + h * h10 * d_[i] + h01 * y_[i + 1] + h * h11 * d_[i + 1];
}

double PchipInterpolant::derivative(double x) const {
    const std::size_t i = interval(x);
    const double h = x_[i + 1] - x_[i];
    const double s = (x - x_[i]) / h;
    const double g00 = 6.0 * s * (s - 1.0) / h;
    const double g10 = (3.0 * s - 1.0) * (s - 1.0);
    const double g01 = -g00;
    const double g11 = s * (3.0 * s - 2.0);
    return g00 * y_[i] + g10 * d_[i] + g01 * y_[i + 1] + g11 * d_[i + 1];
}

void solve_tridiagonal(const std::vector<double>& lower,
                       std::vector<double>& diag,
                       const std::vector<double>& upper,
                       std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    if (n == 0 || lower.size() != n || upper.size() != n || rhs.size() != n)
        throw domain_error("solve_tridiagonal: inconsistent sizes");
    for (std::size_t i = 1; i < n; ++i) {
        double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

double minimize_golden(const std::function<double(double)>& f, double a,
                       double b, int iterations) {
    const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int k = 0; k < iterations && (b - a) > 1e-15 * (std::fabs(a) + std::fabs(b)); ++k) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

double PowerLogFit::amplitude() const { return std::exp(ln_amplitude); }

PowerLogFit fit_power_log(const std::vector<double>& t,
                          const std::vector<double>& y) {
    if (t.size() != y.size() || t.size() < 3)
        throw domain_error("fit_power_log: need >= 3 samples");
    std::vector<double> lt, lly, ly;
    lt.reserve(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] > std::exp(1.0)) || !(y[i] > 0.0))
            throw domain_error("fit_power_log: need t > e and y > 0");
        lt.push_back(std::log(t[i]));
        ly.push_back(std::log(y[i]));
    }
    const auto n = static_cast<Eigen::Index>(t.size());
    Eigen::MatrixXd A(n, 3);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = lt[static_cast<std::size_t>(i)];
        A(i, 2) = std::log(lt[static_cast<std::size_t>(i)]);
        b(i) = ly[static_cast<std::size_t>(i)];
    }
    Eigen::Vector3d c = A.colPivHouseholderQr().solve(b);
    PowerLogFit out;
    out.ln_amplitude = c(0);
    out.power = c(1);
    out.log_power = c(2);
    out.resid_rms = std::sqrt((A * c - b).squaredNorm() / static_cast<double>(n));
    return out;
}

std::vector<double> log_spaced(double lo, double hi, double points_per_decade) {
    if (!(lo > 0.0) || !(hi > lo) || !(points_per_decade > 0.0))
        throw domain_error("log_spaced: need 0 < lo < hi, ppd > 0");
    const double decades = std::log10(hi / lo);
    const int n = std::max(2, static_cast<int>(std::ceil(decades * points_per_decade)) + 1);
    std::vector<double> g(static_cast<std::size_t>(n));
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < n; ++i)
        g[static_cast<std::size_t>(i)] =
            std::exp(llo + (lhi - llo) * static_cast<double>(i) / (n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

}  // namespace hmf
