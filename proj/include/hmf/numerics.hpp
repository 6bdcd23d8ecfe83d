#pragma once
#include <cstddef>
#include <functional>
#include <vector>

namespace hmf {

// Finite-difference weights on arbitrary nodes (Fornberg's recursion).
// Returns w[k][j] such that f^(k)(x0) ~= sum_j w[k][j] * f(nodes[j]),
// for derivative orders k = 0..max_order.  Exact for polynomials of
// degree < nodes.size().
std::vector<std::vector<double>> fd_weights(double x0,
                                            const std::vector<double>& nodes,
                                            int max_order);

// Monotone (Fritsch-Carlson) piecewise-cubic Hermite interpolant on a
// strictly increasing abscissa.  Evaluation outside the data range clamps
// to the end intervals' cubics (no extrapolation blow-up).
class PchipInterpolant {
  public:
    PchipInterpolant() = default;
    PchipInterpolant(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    double derivative(double x) const;
    bool empty() const { return x_.empty(); }
    const std::vector<double>& abscissa() const { return x_; }
    const std::vector<double>& ordinates() const { return y_; }

  private:
    std::size_t interval(double x) const;
    std::vector<double> x_, y_, d_;  // nodes, values, node derivatives
};

// Solve a tridiagonal system in place (Thomas algorithm).
// lower[i] multiplies x[i-1], diag[i] x[i], upper[i] x[i+1]; lower[0] and
// upper[n-1] are ignored.  rhs is overwritten with the solution.
void solve_tridiagonal(const std::vector<double>& lower,
                       std::vector<double>& diag_copy,
                       const std::vector<double>& upper,
                       std::vector<double>& rhs);

// Golden-section minimisation of a unimodal scalar function on [a, b].
double minimize_golden(const std::function<double(double)>& f, double a,
                       double b, int iterations = 200);

// Least-squares fit of ln y = c0 + c1 ln t + c2 ln ln t over samples with
// y > 0, t > e.  Returns {c0, c1, c2} and the rms residual of ln y.
struct PowerLogFit {
    double ln_amplitude = 0.0;  // c0
    double power = 0.0;         // c1   (exponent of t)
    double log_power = 0.0;     // c2   (exponent of ln t)
    double resid_rms = 0.0;
    double amplitude() const;
};
PowerLogFit fit_power_log(const std::vector<double>& t,
                          const std::vector<double>& y);

// Logarithmically spaced grid with a fixed number of points per decade
// (endpoints included; at least two points).
std::vector<double> log_spaced(double lo, double hi, double points_per_decade);

// Compensated (Kahan) accumulator for long running sums.
class KahanSum {
  public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

  private:
    double s_ = 0.0, c_ = 0.0;
};

}  // namespace hmf
