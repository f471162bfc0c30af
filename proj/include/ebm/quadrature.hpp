#pragma once

#include <functional>
#include <vector>

namespace ebm {

struct GaussRule {
    std::vector<double> node;   // on [-1, 1]
    std::vector<double> weight;
};

// Gauss-Legendre rule of order n, generated by Newton iteration on P_n
// (machine precision, no hardcoded tables). Cached per n.
const GaussRule& gauss_legendre(int n);

// fixed-order Gauss-Legendre on [a, b]
double integrate_gl(const std::function<double(double)>& f, double a, double b, int n);

struct QuadResult {
    double value = 0.0;
    double abs_err = 0.0;   // error estimate
    long evals = 0;
    bool converged = true;
};

// Adaptive bisection with GL(7)/GL(15) comparison per panel. Stops when the
// panel estimate difference is below max(rel_tol*|whole|, abs_floor) scaled to
// the panel, or depth exhausts (converged=false then).
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double rel_tol, double abs_floor = 0.0, int max_depth = 48);

// Splits [a, b] at the given interior breakpoints, then integrates each piece
// adaptively. Pieces longer than `geometric_from` are further pre-split on a
// geometric ladder (panel [x, 2x]) so adaptivity starts near the right scale.
QuadResult integrate_piecewise(const std::function<double(double)>& f, double a, double b,
                               std::vector<double> breakpoints, double rel_tol,
                               double geometric_from = 1.0);

// Cumulative Gauss-Legendre integration along sorted grid nodes; cum[i] holds
// the integral from grid[0] to grid[i] with an `order`-point rule per cell.
std::vector<double> cumulative_gl(const std::function<double(double)>& f,
                                  const std::vector<double>& grid, int order = 7);

// Frozen antiderivative table: F(x) = F0 + integral of f from knots.front() to x.
// Knot values are accumulated once (adaptively) at construction; a query refines
// from the bracketing knot with a fixed-order rule. Immutable after construction,
// safe for concurrent reads. Queries outside the knot range clamp to the end
// values (callers choose knots so the clamped mass is negligible).
class CumulativeFunction {
  public:
    CumulativeFunction(std::function<double(double)> f, std::vector<double> knots,
                       double rel_tol, double f0 = 0.0, int query_order = 15);

    double operator()(double x) const;
    double front() const { return value_.front(); }
    double back() const { return value_.back(); }
    const std::vector<double>& knots() const { return knot_; }

  private:
    std::function<double(double)> f_;
    std::vector<double> knot_;
    std::vector<double> value_;
    int order_;
};

// least-squares slope of y against x
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

}
