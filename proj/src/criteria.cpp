#include "ebm/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "json.hpp"

namespace ebm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kEulerGamma = 0.57721566490153286061;
constexpr double kE = 2.71828182845904523536;

// Ein(z) = gamma + ln z + E1(z), entire; series for small z avoids the
// cancellation between ln z and E1(z)
double ein(double z) {
    if (z <= 1.0) {
        double term = 1.0;   // z^k / k!
        double sum = 0.0;
        for (int k = 1; k <= 30; ++k) {
            term *= z / k;
            const double add = term / k;
            sum += (k % 2 == 1) ? add : -add;
            if (add < 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    return kEulerGamma + std::log(z) - std::expint(-z);
}

double side_sign(Side s) { return s == Side::plus ? 1.0 : -1.0; }

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// interior x-breakpoints of H (same coordinates as the l-kinks of h)
std::vector<double> h_breakpoints(const ExcitationProfile& p) { return p.breakpoints; }

struct FitResult {
    double slope_far = 0.0;
    double drift = 0.0;
};

// least-squares log-log slope of x^m exp(-s H) over [lo, hi], fitted in log
// space so divergent sides cannot overflow
double window_slope(const ExcitationProfile& p, double s, int m, double lo, double hi) {
    const int n = 33;
    std::vector<double> lx(n), ly(n);
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / (n - 1);
        const double x = lo * std::pow(hi / lo, t);
        lx[i] = std::log(x);
        ly[i] = m * lx[i] - s * big_h(p, x);
    }
    return ls_slope(lx, ly);
}

FitResult fit_tail(const ExcitationProfile& p, double s, int m, double x_max) {
    FitResult f;
    f.slope_far = window_slope(p, s, m, x_max / 4.0, x_max);
    const double slope_near = window_slope(p, s, m, x_max / 16.0, x_max / 4.0);
    f.drift = std::abs(f.slope_far - slope_near);
    return f;
}

}   // namespace

double big_h(const ExcitationProfile& p, double x) {
    if (!p.homogeneous)
        throw std::invalid_argument("big_h: profile is not spatially homogeneous");
    if (!(x >= 0.0)) throw std::domain_error("big_h: x must be >= 0");
    if (x == 0.0) return 0.0;
    double base = 0.0;
    switch (p.kind) {
        case ProfileKind::single_cookie:
            base = p.delta * (x <= 1.0 ? x : 1.0 + std::log(x));
            break;
        case ProfileKind::piecewise_cookies:
        case ProfileKind::custom_table: {
            const std::vector<double>& knot =
                p.kind == ProfileKind::piecewise_cookies ? p.boundaries : p.table_l;
            if (x >= knot.back()) {
                base = p.knot_big_h.back() + p.knot_h.back() * std::log(x / knot.back());
                break;
            }
            const auto it = std::upper_bound(knot.begin(), knot.end(), x);
            const std::size_t k = static_cast<std::size_t>(it - knot.begin()) - 1;
            // h(l) = A + B l + C l^2 on the segment; int h/l dl = A ln l + B l + C l^2/2
            double A, B, C;
            if (p.kind == ProfileKind::piecewise_cookies) {
                B = p.heights[k];
                A = p.knot_h[k] - B * knot[k];
                C = 0.0;
            } else {
                const double dl = knot[k + 1] - knot[k];
                const double slope = (p.table_phi[k + 1] - p.table_phi[k]) / dl;
                C = 0.5 * slope;
                B = p.table_phi[k] - slope * knot[k];
                A = p.knot_h[k] - p.table_phi[k] * knot[k] + C * knot[k] * knot[k];
            }
            base = p.knot_big_h[k] + B * (x - knot[k]) +
                   C * 0.5 * (x * x - knot[k] * knot[k]);
            if (A != 0.0) base += A * std::log(x / knot[k]);
            break;
        }
        case ProfileKind::exp_decay:
            base = p.delta * ein(p.rate * x);
            break;
        case ProfileKind::log_critical: {
            const double lead = x <= 1.0 ? x : 1.0 + std::log(x);
            const double g_int = std::log(std::log(kE + x)) + (*p.log_crit_cache)(x);
            base = lead + p.alpha * g_int;
            break;
        }
        case ProfileKind::truncated: {
            const double n = p.trunc_level;
            base = big_h(*p.inner, std::min(x, n));
            if (x > n) base += p.inner->h(0.0, n) * std::log(x / n);
            break;
        }
        case ProfileKind::space_damped:
            throw std::invalid_argument("big_h: profile is not spatially homogeneous");
    }
    return p.sign * base;
}

CriterionResult criterion_integral(const ExcitationProfile& p, Side side, int moment,
                                   const CriterionOptions& opt) {
    if (!p.homogeneous)
        throw std::invalid_argument("criterion_integral: profile is not spatially homogeneous");
    if (moment != 0 && moment != 1)
        throw std::invalid_argument("criterion_integral: moment must be 0 or 1");
    if (!(opt.x_max > 1.0) || !(opt.rel_tol > 0.0))
        throw std::invalid_argument("criterion_integral: x_max must exceed 1 and tol be positive");

    const double s = side_sign(side);
    const int m = moment;
    auto f = [&p, s, m](double x) {
        const double lf = m * std::log(x) - s * big_h(p, x);
        return std::exp(lf);
    };
    auto f0 = [&p, s, m](double x) {
        if (x == 0.0) return m == 0 ? 1.0 : 0.0;
        return std::pow(x, m) * std::exp(-s * big_h(p, x));
    };

    CriterionResult out;
    const QuadResult quad =
        integrate_piecewise(f0, 0.0, opt.x_max, h_breakpoints(p), opt.rel_tol);
    out.truncated_value = quad.value;
    out.converged = quad.converged && std::isfinite(quad.value);

    const bool use_declared = opt.tail_mode == TailMode::declared && p.tail.has_value();
    if (use_declared) {
        const double eff = s * p.tail->h_inf;        // decay exponent of exp(-s H)
        const double eff_lc = s * p.tail->log_coeff; // at the boundary: 1/ln l correction
        const double diff = eff - (m + 1);
        out.tail_exponent = m - eff;
        const double x_end = opt.x_max;
        if (std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(eff))) {
            // integrand ~ x^{-1} ln^{-eff_lc} x: finite iff eff_lc > 1
            if (eff_lc > 1.0 + 1e-12) {
                out.status = IntegralStatus::finite;
                out.value = out.truncated_value +
                            f(x_end) * x_end * std::log(x_end) / (eff_lc - 1.0);
            } else if (eff_lc < 1.0 - 1e-12) {
                out.status = IntegralStatus::divergent;
                out.value = kInf;
            } else {
                out.status = IntegralStatus::indeterminate;
                out.value = kNaN;
            }
        } else if (diff > 0.0) {
            out.status = IntegralStatus::finite;
            out.value = out.truncated_value + f(x_end) * x_end / diff;
        } else {
            out.status = IntegralStatus::divergent;
            out.value = kInf;
        }
    } else {
        const FitResult fit = fit_tail(p, s, m, opt.x_max);
        out.tail_exponent = fit.slope_far;
        out.slope_drift = fit.drift;
        if (fit.drift > opt.drift_tol) {
            out.status = IntegralStatus::indeterminate;   // tail has not settled
            out.value = kNaN;
        } else if (fit.slope_far >= -(1.0 - opt.band)) {
            out.status = IntegralStatus::divergent;
            out.value = kInf;
        } else if (fit.slope_far <= -(1.0 + opt.band)) {
            out.status = IntegralStatus::finite;
            out.value = out.truncated_value +
                        f(opt.x_max) * opt.x_max / (-1.0 - fit.slope_far);
        } else {
            out.status = IntegralStatus::indeterminate;   // inside the boundary band
            out.value = kNaN;
        }
    }

    // quadrature failure must never masquerade as a finite answer
    if (out.status == IntegralStatus::finite && !out.converged) {
        out.status = IntegralStatus::indeterminate;
        out.value = kNaN;
    }
    return out;
}

namespace {

// sigma^2 = v^3 Var-rate of the dual additive functional, evaluated through the
// one-dimensional reduction
//   var_rate = c int_0^inf s'(z) Gamma(z)^2 dz,
//   Gamma(z) = int_z^inf (u - mu) exp(-H(u)) du,  mu = C2+/C1+,
// with Gamma and the z-integral in closed form beyond the settle point Y where
// exp(-H(u)) = K u^{-hq}.
SigmaResult sigma_from_side(const ExcitationProfile& sp, double hq, double y_settle,
                            const CriterionOptions& opt) {
    SigmaResult out;
    const CriterionOptions copt = opt;
    const CriterionResult c1 = criterion_integral(sp, Side::plus, 0, copt);
    const CriterionResult c2 = criterion_integral(sp, Side::plus, 1, copt);
    if (c1.status != IntegralStatus::finite || c2.status != IntegralStatus::finite)
        return out;   // indeterminate: inconsistent with hq > 4
    const double c = 1.0 / c1.value;
    const double mu = c2.value / c1.value;
    const double v = 1.0 / mu;

    const double Y = y_settle;
    const double H_Y = big_h(sp, Y);
    const double emhy = std::exp(-H_Y);
    // Gamma(Y) = K [Y^{2-h}/(h-2) - mu Y^{1-h}/(h-1)], K = exp(-H(Y)) Y^h
    const double gamma_Y = emhy * (Y * Y / (hq - 2.0) - mu * Y / (hq - 1.0));

    std::vector<double> knots;
    knots.push_back(0.0);
    for (double b : sp.breakpoints)
        if (b > 0.0 && b < Y) knots.push_back(b);
    if (mu > 0.0 && mu < Y) knots.push_back(mu);
    for (double g = 1.0; g < Y; g *= 2.0) knots.push_back(g);
    knots.push_back(Y);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    auto centered = [&sp, mu](double u) { return (u - mu) * std::exp(-big_h(sp, u)); };
    const CumulativeFunction cum(centered, knots, 1e-11);
    const double cum_Y = cum.back();

    // Gamma(0) = C2 - mu C1 = 0; a visible residual means the quadratures
    // disagree and the result cannot be trusted
    const double gamma0 = gamma_Y + cum_Y;
    const double gamma_scale = c2.value + mu * c1.value;
    if (!(std::abs(gamma0) <= 1e-7 * gamma_scale)) return out;

    auto integrand = [&](double z) {
        const double gamma_z = gamma_Y + (cum_Y - cum(z));
        return std::exp(big_h(sp, z)) / z * gamma_z * gamma_z;
    };
    const QuadResult core = integrate_piecewise(integrand, 0.0, Y, knots, opt.rel_tol);
    if (!core.converged || !std::isfinite(core.value)) return out;

    const double h2 = hq - 2.0, h1 = hq - 1.0, h3 = hq - 3.0, h4 = hq - 4.0;
    const double tail =
        emhy * (Y * Y * Y * Y / (h4 * h2 * h2) - 2.0 * mu * Y * Y * Y / (h3 * h2 * h1) +
                mu * mu * Y * Y / (h2 * h1 * h1));

    const double var_rate = c * (core.value + tail);
    out.status = IntegralStatus::finite;
    out.value = std::sqrt(v * v * v * var_rate);
    return out;
}

}   // namespace

SigmaResult sigma_constant(const ExcitationProfile& p, const CriterionOptions& opt) {
    if (!p.homogeneous)
        throw std::invalid_argument("sigma_constant: profile is not spatially homogeneous");
    SigmaResult out;

    if (opt.tail_mode == TailMode::declared && p.tail.has_value()) {
        const double h_inf = p.tail->h_inf;
        if (std::abs(h_inf) <= 1e-12) return out;   // no tail mass: not applicable
        const ExcitationProfile sp = h_inf > 0.0 ? p : reflected(p);
        const double e = std::abs(h_inf);
        if (std::abs(e - 4.0) <= 1e-12) return out;   // boundary left open
        if (e < 4.0) {
            out.status = IntegralStatus::divergent;
            out.value = kInf;
            return out;
        }
        if (!std::isfinite(sp.settle_l) || sp.tail->log_coeff != 0.0 ||
            sp.settle_l > opt.x_max)
            return out;   // no exact tail available past the truncation point
        return sigma_from_side(sp, e, std::max(sp.settle_l, 1e-6), opt);
    }

    // numeric tail resolution: fit the decay side of exp(-H)
    FitResult fit = fit_tail(p, 1.0, 0, opt.x_max);
    ExcitationProfile sp = p;
    if (fit.slope_far >= 0.0) {
        sp = reflected(p);
        fit = fit_tail(sp, 1.0, 0, opt.x_max);
    }
    const double e_est = -fit.slope_far;
    if (fit.drift > opt.drift_tol) return out;
    if (e_est <= opt.band) return out;   // no usable tail mass
    if (std::abs(e_est - 4.0) <= opt.band) return out;
    if (e_est < 4.0) {
        out.status = IntegralStatus::divergent;
        out.value = kInf;
        return out;
    }
    return sigma_from_side(sp, e_est, opt.x_max / 4.0, opt);
}

ClassificationReport classify(const ExcitationProfile& p, const CriterionOptions& opt) {
    if (!p.homogeneous)
        throw std::invalid_argument("classify: profile is not spatially homogeneous");
    ClassificationReport r;
    r.profile_id = p.id;
    r.x_max = opt.x_max;
    r.rel_tol = opt.rel_tol;
    r.c1_plus = criterion_integral(p, Side::plus, 0, opt);
    r.c1_minus = criterion_integral(p, Side::minus, 0, opt);
    r.c2_plus = criterion_integral(p, Side::plus, 1, opt);
    r.c2_minus = criterion_integral(p, Side::minus, 1, opt);

    if (r.c1_plus.status == IntegralStatus::finite &&
        r.c1_minus.status == IntegralStatus::finite)
        throw std::logic_error(
            "classify: C1+ and C1- both finite; transience in both directions is impossible");

    const bool any_indet = r.c1_plus.status == IntegralStatus::indeterminate ||
                           r.c1_minus.status == IntegralStatus::indeterminate ||
                           r.c2_plus.status == IntegralStatus::indeterminate ||
                           r.c2_minus.status == IntegralStatus::indeterminate;
    if (any_indet) {
        r.verdict = Verdict::INDETERMINATE;
        return r;
    }

    if (r.c1_plus.status == IntegralStatus::finite) {
        r.verdict = Verdict::TRANSIENT_RIGHT;
        r.pi_norm_c = 1.0 / r.c1_plus.value;
        if (r.c2_plus.status == IntegralStatus::finite) {
            r.speed = r.c1_plus.value / r.c2_plus.value;
            r.pi_mean = r.c2_plus.value / r.c1_plus.value;
        }
    } else if (r.c1_minus.status == IntegralStatus::finite) {
        r.verdict = Verdict::TRANSIENT_LEFT;
        r.pi_norm_c = 1.0 / r.c1_minus.value;
        if (r.c2_minus.status == IntegralStatus::finite) {
            r.speed = -r.c1_minus.value / r.c2_minus.value;
            r.pi_mean = r.c2_minus.value / r.c1_minus.value;
        }
    } else {
        r.verdict = Verdict::RECURRENT;
    }

    const SigmaResult sig = sigma_constant(p, opt);
    r.sigma_status = sig.status;
    r.sigma = sig.value;
    return r;
}

double invariant_density(const ExcitationProfile& p, double x) {
    return std::exp(-big_h(p, x));
}

double pi_normalization(const ExcitationProfile& p, const CriterionOptions& opt) {
    const CriterionResult c1 = criterion_integral(p, Side::plus, 0, opt);
    if (c1.status == IntegralStatus::divergent)
        throw infinite_measure_error(
            "pi_normalization: C1+ diverges, the invariant measure is not normalizable");
    if (c1.status != IntegralStatus::finite)
        throw std::runtime_error("pi_normalization: C1+ is indeterminate");
    return 1.0 / c1.value;
}

ScaleValue scale_function(const ExcitationProfile& p, double x, double rel_tol) {
    if (!(x > 0.0)) throw std::domain_error("scale_function: x must be > 0");
    ScaleValue out;
    out.s_prime = std::exp(big_h(p, x)) / x;
    auto sp = [&p](double u) { return std::exp(big_h(p, u)) / u; };
    if (x == 1.0) {
        out.s = 0.0;
    } else if (x > 1.0) {
        out.s = integrate_piecewise(sp, 1.0, x, h_breakpoints(p), rel_tol).value;
    } else {
        out.s = -integrate_piecewise(sp, x, 1.0, h_breakpoints(p), rel_tol).value;
    }
    return out;
}

InvariantLaw::InvariantLaw(ExcitationProfile p, const CriterionOptions& opt)
    : p_(std::move(p)) {
    const CriterionResult c1 = criterion_integral(p_, Side::plus, 0, opt);
    if (c1.status == IntegralStatus::divergent)
        throw infinite_measure_error("InvariantLaw: C1+ diverges");
    if (c1.status != IntegralStatus::finite)
        throw std::runtime_error("InvariantLaw: C1+ is indeterminate");

    tail_e_ = p_.tail ? p_.tail->h_inf : -c1.tail_exponent;
    tail_lc_ = p_.tail ? p_.tail->log_coeff : 0.0;
    tail_log_ = std::abs(tail_e_ - 1.0) <= 1e-12;   // boundary case, needs tail_lc_ > 1
    x_hi_ = std::isfinite(p_.settle_l) ? std::max(p_.settle_l, 1.0) : opt.x_max;

    std::vector<double> knots;
    knots.push_back(0.0);
    for (double b : p_.breakpoints)
        if (b > 0.0 && b < x_hi_) knots.push_back(b);
    for (double g = 1.0; g < x_hi_; g *= 2.0) knots.push_back(g);
    knots.push_back(x_hi_);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    auto dens = [this](double x) { return std::exp(-big_h(p_, x)); };
    cum_ = std::make_shared<const CumulativeFunction>(dens, std::move(knots), 1e-11);

    const double total = cum_->back() + tail_mass(x_hi_);
    c_ = 1.0 / total;

    const CriterionResult c2 = criterion_integral(p_, Side::plus, 1, opt);
    if (c2.status == IntegralStatus::finite) mean_ = c2.value * c_;
}

double InvariantLaw::tail_mass(double x) const {
    // exact once h has settled: int_x^inf exp(-H) = exp(-H(x)) x / (e - 1);
    // at the integrability boundary e = 1 the leading log-corrected form is used
    const double f = std::exp(-big_h(p_, x));
    if (tail_log_) return f * x * std::log(x) / (tail_lc_ - 1.0);
    return f * x / (tail_e_ - 1.0);
}

double InvariantLaw::density(double x) const {
    if (x <= 0.0) return 0.0;
    return c_ * std::exp(-big_h(p_, x));
}

double InvariantLaw::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (x < x_hi_) return std::min(1.0, c_ * (*cum_)(x));
    return std::max(0.0, 1.0 - c_ * tail_mass(x));
}

double InvariantLaw::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("InvariantLaw::quantile: u must be in (0, 1)");
    double lo = 0.0, hi = std::max(x_hi_, 1.0);
    while (cdf(hi) < u) {
        hi *= 2.0;
        if (hi > 1e15) break;
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < u)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-13 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

RecurrenceSufficiency sufficient_recurrence_nonhomogeneous(const ExcitationProfile& p,
                                                           double z_max, int n_grid,
                                                           double margin) {
    if (!p.nonneg)
        throw std::invalid_argument(
            "sufficient_recurrence_nonhomogeneous: profile must be nonnegative");
    if (!(z_max > 0.0) || n_grid < 8)
        throw std::invalid_argument(
            "sufficient_recurrence_nonhomogeneous: need z_max > 0 and n_grid >= 8");
    std::vector<double> grid(static_cast<std::size_t>(n_grid) + 1);
    for (int j = 0; j <= n_grid; ++j) grid[j] = z_max * j / n_grid;
    auto mass = [&p](double x) { return delta_total(p, x); };
    const std::vector<double> cum = cumulative_gl(mass, grid, 7);
    double best = kInf;
    for (int j = 1; j <= n_grid; ++j)
        if (grid[j] >= 0.5 * z_max) best = std::min(best, cum[j] / grid[j]);
    return best < 1.0 - margin ? RecurrenceSufficiency::RECURRENT_SUFFICIENT
                               : RecurrenceSufficiency::INCONCLUSIVE;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::RECURRENT: return "RECURRENT";
        case Verdict::TRANSIENT_RIGHT: return "TRANSIENT_RIGHT";
        case Verdict::TRANSIENT_LEFT: return "TRANSIENT_LEFT";
        case Verdict::INDETERMINATE: return "INDETERMINATE";
    }
    return "INDETERMINATE";
}

const char* to_string(IntegralStatus s) {
    switch (s) {
        case IntegralStatus::finite: return "finite";
        case IntegralStatus::divergent: return "divergent";
        case IntegralStatus::indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

std::string report_csv_header() {
    return "profile_id,c1_plus,c1_plus_status,c1_minus,c1_minus_status,"
           "c2_plus,c2_plus_status,c2_minus,c2_minus_status,"
           "verdict,speed,pi_mean,sigma,sigma_status,x_max,tol";
}

std::string report_csv_row(const ClassificationReport& r) {
    std::string row = "\"" + r.profile_id + "\"";
    const CriterionResult* cr[4] = {&r.c1_plus, &r.c1_minus, &r.c2_plus, &r.c2_minus};
    for (const CriterionResult* c : cr) {
        row += "," + fmt17(c->value);
        row += std::string(",") + to_string(c->status);
    }
    row += std::string(",") + to_string(r.verdict);
    row += "," + fmt17(r.speed);
    row += "," + fmt17(r.pi_mean ? *r.pi_mean : kNaN);
    row += "," + fmt17(r.sigma);
    row += std::string(",") + to_string(r.sigma_status);
    row += "," + fmt17(r.x_max);
    row += "," + fmt17(r.rel_tol);
    return row;
}

std::string report_json(const ClassificationReport& r) {
    nlohmann::ordered_json j;
    j["profile_id"] = r.profile_id;
    auto put = [&j](const char* key, const CriterionResult& c) {
        if (std::isfinite(c.value))
            j[key] = c.value;
        else
            j[key] = nullptr;
        j[std::string(key) + "_status"] = to_string(c.status);
    };
    put("c1_plus", r.c1_plus);
    put("c1_minus", r.c1_minus);
    put("c2_plus", r.c2_plus);
    put("c2_minus", r.c2_minus);
    j["verdict"] = to_string(r.verdict);
    j["speed"] = r.speed;
    if (r.pi_norm_c)
        j["pi_norm_c"] = *r.pi_norm_c;
    else
        j["pi_norm_c"] = nullptr;
    if (r.pi_mean)
        j["pi_mean"] = *r.pi_mean;
    else
        j["pi_mean"] = nullptr;
    if (std::isfinite(r.sigma))
        j["sigma"] = r.sigma;
    else
        j["sigma"] = nullptr;
    j["sigma_status"] = to_string(r.sigma_status);
    j["x_max"] = r.x_max;
    j["tol"] = r.rel_tol;
    return j.dump();
}

}
