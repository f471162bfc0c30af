#include "ebm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace ebm {

namespace {

GaussRule build_gauss_legendre(int n) {
    GaussRule r;
    r.node.resize(n);
    r.weight.resize(n);
    const double pi = 3.14159265358979323846;
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-like initial guess for the i-th root of P_n
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // evaluate P_n(x) and P'_n(x) by recurrence
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.node[i] = -x;
        r.node[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        r.weight[i] = w;
        r.weight[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.node[n / 2] = 0.0;
    return r;
}

double gl_on(const std::function<double(double)>& f, double a, double b, const GaussRule& r) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < r.node.size(); ++i) s += r.weight[i] * f(c + h * r.node[i]);
    return s * h;
}

struct AdaptiveCtx {
    const std::function<double(double)>& f;
    const GaussRule& lo;
    const GaussRule& hi;
    double tol_per_unit;   // absolute tolerance per unit length
    long evals = 0;
    bool converged = true;
};

double adapt(AdaptiveCtx& ctx, double a, double b, double coarse, int depth, double& err_acc) {
    const double fine = gl_on(ctx.f, a, b, ctx.hi);
    ctx.evals += static_cast<long>(ctx.hi.node.size());
    const double err = std::abs(fine - coarse);
    if (err <= ctx.tol_per_unit * (b - a) || depth <= 0) {
        if (depth <= 0 && err > ctx.tol_per_unit * (b - a)) ctx.converged = false;
        err_acc += err;
        return fine;
    }
    const double mid = 0.5 * (a + b);
    const double cl = gl_on(ctx.f, a, mid, ctx.lo);
    const double cr = gl_on(ctx.f, mid, b, ctx.lo);
    ctx.evals += 2 * static_cast<long>(ctx.lo.node.size());
    return adapt(ctx, a, mid, cl, depth - 1, err_acc) + adapt(ctx, mid, b, cr, depth - 1, err_acc);
}

}   // namespace

const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_gauss_legendre(n)).first;
    return it->second;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int n) {
    return gl_on(f, a, b, gauss_legendre(n));
}

QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double rel_tol, double abs_floor, int max_depth) {
    QuadResult out;
    if (!(b > a)) return out;
    const GaussRule& lo = gauss_legendre(7);
    const GaussRule& hi = gauss_legendre(15);
    const double coarse = gl_on(f, a, b, lo);
    const double first = gl_on(f, a, b, hi);
    double scale = std::max(std::abs(first), abs_floor);
    if (scale == 0.0) scale = 1e-300;
    AdaptiveCtx ctx{f, lo, hi, rel_tol * scale / (b - a), 0, true};
    ctx.evals = static_cast<long>(lo.node.size());
    double err = 0.0;
    out.value = adapt(ctx, a, b, coarse, max_depth, err);
    out.abs_err = err;
    out.evals = ctx.evals;
    out.converged = ctx.converged;
    return out;
}

QuadResult integrate_piecewise(const std::function<double(double)>& f, double a, double b,
                               std::vector<double> breakpoints, double rel_tol,
                               double geometric_from) {
    QuadResult out;
    if (!(b > a)) return out;
    std::vector<double> cuts;
    cuts.push_back(a);
    std::sort(breakpoints.begin(), breakpoints.end());
    for (double c : breakpoints)
        if (c > a && c < b && (cuts.empty() || c > cuts.back())) cuts.push_back(c);
    // geometric ladder for the far field
    double g = std::max(geometric_from, cuts.back());
    if (g <= 0.0) g = 1.0;
    while (g < b) {
        if (g > cuts.back()) cuts.push_back(g);
        g *= 2.0;
    }
    cuts.push_back(b);

    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        QuadResult piece = integrate_adaptive(f, cuts[i], cuts[i + 1], rel_tol,
                                              std::abs(out.value));
        out.value += piece.value;
        out.abs_err += piece.abs_err;
        out.evals += piece.evals;
        out.converged = out.converged && piece.converged;
    }
    return out;
}

std::vector<double> cumulative_gl(const std::function<double(double)>& f,
                                  const std::vector<double>& grid, int order) {
    if (grid.size() < 2) throw std::invalid_argument("cumulative_gl: need at least two nodes");
    const GaussRule& r = gauss_legendre(order);
    std::vector<double> cum(grid.size(), 0.0);
    for (std::size_t i = 1; i < grid.size(); ++i)
        cum[i] = cum[i - 1] + gl_on(f, grid[i - 1], grid[i], r);
    return cum;
}

CumulativeFunction::CumulativeFunction(std::function<double(double)> f,
                                       std::vector<double> knots, double rel_tol,
                                       double f0, int query_order)
    : f_(std::move(f)), knot_(std::move(knots)), order_(query_order) {
    if (knot_.size() < 2) throw std::invalid_argument("CumulativeFunction: need at least two knots");
    if (!std::is_sorted(knot_.begin(), knot_.end()))
        throw std::invalid_argument("CumulativeFunction: knots must be sorted");
    value_.resize(knot_.size());
    value_[0] = f0;
    for (std::size_t i = 1; i < knot_.size(); ++i) {
        const QuadResult q = integrate_adaptive(f_, knot_[i - 1], knot_[i], rel_tol,
                                                std::abs(value_[i - 1]));
        value_[i] = value_[i - 1] + q.value;
    }
}

double CumulativeFunction::operator()(double x) const {
    if (x <= knot_.front()) return value_.front();
    if (x >= knot_.back()) return value_.back();
    const auto it = std::upper_bound(knot_.begin(), knot_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - knot_.begin()) - 1;
    if (x == knot_[i]) return value_[i];
    return value_[i] + gl_on(f_, knot_[i], x, gauss_legendre(order_));
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ls_slope: bad input");
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}
