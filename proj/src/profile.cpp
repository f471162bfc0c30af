#include "ebm/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ebm {

namespace {

constexpr double kE = 2.71828182845904523536;
constexpr double kInf = std::numeric_limits<double>::infinity();

// smooth hump with g(0) = 0, g(l) ~ 1/ln(l) as l -> inf
double g_shape(double l) { return l / ((1.0 + l) * std::log(kE + l)); }

double g_shape_prime(double l) {
    const double ln = std::log(kE + l);
    const double num = ln - l * (1.0 + l) / (kE + l);
    const double den = (1.0 + l) * (1.0 + l) * ln * ln;
    return num / den;
}

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += fmt_g(v[i]);
    }
    return out + "]";
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v))
        throw std::invalid_argument(std::string("profile: ") + what + " must be finite");
}

double damp_factor(const ExcitationProfile& p, double x) {
    return 1.0 / (1.0 + std::abs(x) / p.space_scale);
}

}   // namespace

double ExcitationProfile::phi(double x, double l) const {
    if (l < 0.0) throw std::domain_error("eval_phi: local time l must be >= 0");
    double base = 0.0;
    switch (kind) {
        case ProfileKind::single_cookie:
            base = (l <= 1.0) ? delta : 0.0;
            break;
        case ProfileKind::piecewise_cookies: {
            if (l < boundaries.back()) {
                const auto it = std::upper_bound(boundaries.begin(), boundaries.end(), l);
                base = heights[static_cast<std::size_t>(it - boundaries.begin()) - 1];
            }
            break;
        }
        case ProfileKind::exp_decay:
            base = delta * rate * std::exp(-rate * l);
            break;
        case ProfileKind::log_critical:
            base = (l <= 1.0 ? 1.0 : 0.0) + alpha * g_shape_prime(l);
            break;
        case ProfileKind::custom_table: {
            if (l < table_l.back()) {
                const auto it = std::upper_bound(table_l.begin(), table_l.end(), l);
                const std::size_t k = static_cast<std::size_t>(it - table_l.begin()) - 1;
                const double t = (l - table_l[k]) / (table_l[k + 1] - table_l[k]);
                base = table_phi[k] + t * (table_phi[k + 1] - table_phi[k]);
            } else if (l == table_l.back()) {
                base = table_phi.back();
            }
            break;
        }
        case ProfileKind::truncated:
            base = (l <= trunc_level) ? inner->phi(x, l) : 0.0;
            break;
        case ProfileKind::space_damped:
            base = damp_factor(*this, x) * inner->phi(0.0, l);
            break;
    }
    return sign * base;
}

double ExcitationProfile::h(double x, double l) const {
    if (l < 0.0) throw std::domain_error("eval_h: local time l must be >= 0");
    double base = 0.0;
    switch (kind) {
        case ProfileKind::single_cookie:
            base = delta * std::min(l, 1.0);
            break;
        case ProfileKind::piecewise_cookies: {
            if (l >= boundaries.back()) {
                base = knot_h.back();
            } else {
                const auto it = std::upper_bound(boundaries.begin(), boundaries.end(), l);
                const std::size_t k = static_cast<std::size_t>(it - boundaries.begin()) - 1;
                base = knot_h[k] + heights[k] * (l - boundaries[k]);
            }
            break;
        }
        case ProfileKind::exp_decay:
            base = delta * (-std::expm1(-rate * l));
            break;
        case ProfileKind::log_critical:
            base = std::min(l, 1.0) + alpha * g_shape(l);
            break;
        case ProfileKind::custom_table: {
            if (l >= table_l.back()) {
                base = knot_h.back();
            } else {
                const auto it = std::upper_bound(table_l.begin(), table_l.end(), l);
                const std::size_t k = static_cast<std::size_t>(it - table_l.begin()) - 1;
                const double dl = table_l[k + 1] - table_l[k];
                const double t = l - table_l[k];
                const double slope = (table_phi[k + 1] - table_phi[k]) / dl;
                base = knot_h[k] + table_phi[k] * t + 0.5 * slope * t * t;
            }
            break;
        }
        case ProfileKind::truncated:
            base = inner->h(x, std::min(l, trunc_level));
            break;
        case ProfileKind::space_damped:
            base = damp_factor(*this, x) * inner->h(0.0, l);
            break;
    }
    return sign * base;
}

ExcitationProfile make_single_cookie(double delta) {
    require_finite(delta, "single_cookie delta");
    ExcitationProfile p;
    p.kind = ProfileKind::single_cookie;
    p.delta = delta;
    p.homogeneous = true;
    p.nonneg = delta >= 0.0;
    p.nonpos = delta <= 0.0;
    p.bound = std::abs(delta);
    p.tail = TailInfo{delta, 0.0};
    p.settle_l = 1.0;
    p.breakpoints = {1.0};
    p.id = "single_cookie(delta=" + fmt_g(delta) + ")";
    return p;
}

ExcitationProfile make_piecewise_cookies(std::vector<double> boundaries,
                                         std::vector<double> heights) {
    if (boundaries.size() < 2 || heights.size() + 1 != boundaries.size())
        throw std::invalid_argument(
            "piecewise_cookies: need K+1 boundaries for K heights, K >= 1");
    if (boundaries.front() != 0.0)
        throw std::invalid_argument("piecewise_cookies: first boundary must be 0");
    for (std::size_t i = 0; i + 1 < boundaries.size(); ++i)
        if (!(boundaries[i] < boundaries[i + 1]))
            throw std::invalid_argument(
                "piecewise_cookies: boundaries must be strictly increasing");
    for (double b : boundaries) require_finite(b, "piecewise_cookies boundary");
    for (double h : heights) require_finite(h, "piecewise_cookies height");

    ExcitationProfile p;
    p.kind = ProfileKind::piecewise_cookies;
    p.boundaries = std::move(boundaries);
    p.heights = std::move(heights);
    p.knot_h.resize(p.boundaries.size(), 0.0);
    for (std::size_t i = 0; i < p.heights.size(); ++i)
        p.knot_h[i + 1] = p.knot_h[i] + p.heights[i] * (p.boundaries[i + 1] - p.boundaries[i]);
    // H at knots: on a segment h(l) = A + B l, so int h/l dl = A ln l + B l
    p.knot_big_h.resize(p.boundaries.size(), 0.0);
    for (std::size_t i = 0; i + 1 < p.boundaries.size(); ++i) {
        const double lo = p.boundaries[i], hi = p.boundaries[i + 1];
        const double B = p.heights[i];
        const double A = p.knot_h[i] - B * lo;
        double seg = B * (hi - lo);
        if (A != 0.0) seg += A * std::log(hi / lo);
        p.knot_big_h[i + 1] = p.knot_big_h[i] + seg;
    }
    p.homogeneous = true;
    p.nonneg = std::all_of(p.heights.begin(), p.heights.end(), [](double v) { return v >= 0.0; });
    p.nonpos = std::all_of(p.heights.begin(), p.heights.end(), [](double v) { return v <= 0.0; });
    p.bound = 0.0;
    for (double h : p.heights) p.bound = std::max(p.bound, std::abs(h));
    p.tail = TailInfo{p.knot_h.back(), 0.0};
    p.settle_l = p.boundaries.back();
    p.breakpoints = p.boundaries;
    p.id = "piecewise_cookies(b=" + fmt_list(p.boundaries) + ",h=" + fmt_list(p.heights) + ")";
    return p;
}

ExcitationProfile make_exp_decay(double delta, double rate) {
    require_finite(delta, "exp_decay delta");
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw std::invalid_argument("exp_decay: rate must be positive and finite");
    ExcitationProfile p;
    p.kind = ProfileKind::exp_decay;
    p.delta = delta;
    p.rate = rate;
    p.homogeneous = true;
    p.nonneg = delta >= 0.0;
    p.nonpos = delta <= 0.0;
    p.bound = std::abs(delta) * rate;
    p.tail = TailInfo{delta, 0.0};
    // exp(-45) < 3e-20: h is constant to double precision past this point
    p.settle_l = 45.0 / rate;
    p.breakpoints = {};
    p.id = "exp_decay(delta=" + fmt_g(delta) + ",rate=" + fmt_g(rate) + ")";
    return p;
}

ExcitationProfile make_log_critical(double alpha) {
    require_finite(alpha, "log_critical alpha");
    ExcitationProfile p;
    p.kind = ProfileKind::log_critical;
    p.alpha = alpha;
    p.homogeneous = true;
    p.nonneg = alpha == 0.0;
    p.nonpos = false;
    p.bound = 1.0 + 2.0 * std::abs(alpha);
    p.tail = TailInfo{1.0, alpha};
    p.settle_l = kInf;
    p.breakpoints = {1.0};
    p.id = "log_critical(alpha=" + fmt_g(alpha) + ")";

    // G(x) = ln ln(e+x) + R(x) with R the integral of the remainder
    //   r(l) = (e-1) / ((1+l)(e+l) ln(e+l)),
    // which decays like (e-1)/(l^2 ln l). Knots reach 2^62; beyond that the
    // clamped tail is below 1e-18 absolute.
    std::vector<double> knots;
    knots.push_back(0.0);
    for (int k = 0; k <= 62; ++k) knots.push_back(0.25 * std::ldexp(1.0, k));
    auto r = [](double l) {
        return (kE - 1.0) / ((1.0 + l) * (kE + l) * std::log(kE + l));
    };
    p.log_crit_cache = std::make_shared<CumulativeFunction>(r, std::move(knots), 1e-12);
    return p;
}

ExcitationProfile make_custom_table(std::vector<double> l, std::vector<double> phi) {
    if (l.size() != phi.size() || l.size() < 2)
        throw std::invalid_argument("custom_table: need two equal-length columns, >= 2 rows");
    if (l.front() != 0.0)
        throw std::invalid_argument("custom_table: first l must be 0");
    for (std::size_t i = 0; i + 1 < l.size(); ++i)
        if (!(l[i] < l[i + 1]))
            throw std::invalid_argument("custom_table: l must be strictly increasing");
    for (double v : l) require_finite(v, "custom_table l");
    for (double v : phi) require_finite(v, "custom_table phi");

    ExcitationProfile p;
    p.kind = ProfileKind::custom_table;
    p.table_l = std::move(l);
    p.table_phi = std::move(phi);
    p.knot_h.resize(p.table_l.size(), 0.0);
    for (std::size_t i = 0; i + 1 < p.table_l.size(); ++i)
        p.knot_h[i + 1] = p.knot_h[i] + 0.5 * (p.table_phi[i] + p.table_phi[i + 1]) *
                                            (p.table_l[i + 1] - p.table_l[i]);
    // H at knots: h(l) = A + B l + C l^2 per segment, int h/l dl = A ln l + B l + C l^2/2
    p.knot_big_h.resize(p.table_l.size(), 0.0);
    for (std::size_t i = 0; i + 1 < p.table_l.size(); ++i) {
        const double lo = p.table_l[i], hi = p.table_l[i + 1];
        const double slope = (p.table_phi[i + 1] - p.table_phi[i]) / (hi - lo);
        const double C = 0.5 * slope;
        const double B = p.table_phi[i] - slope * lo;
        const double A = p.knot_h[i] - p.table_phi[i] * lo + C * lo * lo;
        double seg = B * (hi - lo) + 0.5 * C * (hi * hi - lo * lo);
        if (A != 0.0) seg += A * std::log(hi / lo);
        p.knot_big_h[i + 1] = p.knot_big_h[i] + seg;
    }
    p.homogeneous = true;
    p.nonneg = std::all_of(p.table_phi.begin(), p.table_phi.end(),
                           [](double v) { return v >= 0.0; });
    p.nonpos = std::all_of(p.table_phi.begin(), p.table_phi.end(),
                           [](double v) { return v <= 0.0; });
    p.bound = 0.0;
    for (double v : p.table_phi) p.bound = std::max(p.bound, std::abs(v));
    p.tail = TailInfo{p.knot_h.back(), 0.0};
    p.settle_l = p.table_l.back();
    p.breakpoints = p.table_l;
    p.id = "custom_table(knots=" + std::to_string(p.table_l.size()) + ")";
    return p;
}

ExcitationProfile make_truncated(ExcitationProfile inner, double level) {
    if (!(level > 0.0) || !std::isfinite(level))
        throw std::invalid_argument("truncated: level must be positive and finite");
    ExcitationProfile p;
    p.kind = ProfileKind::truncated;
    p.trunc_level = level;
    p.homogeneous = inner.homogeneous;
    p.nonneg = inner.nonneg;
    p.nonpos = inner.nonpos;
    p.bound = inner.bound;
    p.settle_l = std::min(inner.settle_l, level);
    for (double b : inner.breakpoints)
        if (b < level) p.breakpoints.push_back(b);
    p.breakpoints.push_back(level);
    p.id = "truncated(" + inner.id + ",n=" + fmt_g(level) + ")";
    p.inner = std::make_shared<const ExcitationProfile>(std::move(inner));
    if (p.homogeneous) p.tail = TailInfo{p.h(0.0, p.settle_l), 0.0};
    return p;
}

ExcitationProfile make_space_damped(ExcitationProfile inner, double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw std::invalid_argument("space_damped: scale must be positive and finite");
    if (!inner.homogeneous)
        throw std::invalid_argument("space_damped: inner profile must be homogeneous");
    ExcitationProfile p;
    p.kind = ProfileKind::space_damped;
    p.space_scale = scale;
    p.homogeneous = false;
    p.nonneg = inner.nonneg;
    p.nonpos = inner.nonpos;
    p.bound = inner.bound;
    p.tail = inner.tail;   // tail of h(0, .); the damp factor is 1 at x = 0
    p.settle_l = inner.settle_l;
    p.breakpoints = inner.breakpoints;
    p.id = "space_damped(" + inner.id + ",scale=" + fmt_g(scale) + ")";
    p.inner = std::make_shared<const ExcitationProfile>(std::move(inner));
    return p;
}

ExcitationProfile reflected(ExcitationProfile p) {
    p.sign = -p.sign;
    std::swap(p.nonneg, p.nonpos);
    if (p.tail) {
        p.tail->h_inf = -p.tail->h_inf;
        p.tail->log_coeff = -p.tail->log_coeff;
    }
    const std::string wrap = "reflected(";
    if (p.id.size() > wrap.size() + 1 && p.id.compare(0, wrap.size(), wrap) == 0 &&
        p.id.back() == ')')
        p.id = p.id.substr(wrap.size(), p.id.size() - wrap.size() - 1);
    else
        p.id = wrap + p.id + ")";
    return p;
}

ExcitationProfile load_table_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("custom_table: cannot open " + path);
    std::vector<double> col_l, col_phi;
    std::string line;
    long row = 0;
    while (std::getline(in, line)) {
        ++row;
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
        if (trimmed.empty() || trimmed[0] == '#') continue;
        std::replace(trimmed.begin(), trimmed.end(), ',', ' ');
        std::istringstream ss(trimmed);
        double l, phi;
        if (!(ss >> l >> phi)) {
            if (col_l.empty() && row == 1) continue;   // header row
            throw std::runtime_error(path + ":" + std::to_string(row) +
                                     ": expected two numeric columns (l, phi)");
        }
        std::string extra;
        if (ss >> extra)
            throw std::runtime_error(path + ":" + std::to_string(row) +
                                     ": expected exactly two columns");
        if (!col_l.empty() && !(l > col_l.back()))
            throw std::runtime_error(path + ":" + std::to_string(row) +
                                     ": l values must be strictly increasing");
        col_l.push_back(l);
        col_phi.push_back(phi);
    }
    if (col_l.size() < 2)
        throw std::runtime_error(path + ": need at least two data rows");
    if (col_l.front() != 0.0)
        throw std::runtime_error(path + ": first l value must be 0");
    ExcitationProfile p = make_custom_table(std::move(col_l), std::move(col_phi));
    std::string base = path;
    const std::size_t slash = base.find_last_of('/');
    if (slash != std::string::npos) base = base.substr(slash + 1);
    p.id = "custom_table(" + base + ")";
    return p;
}

double eval_phi(const ExcitationProfile& p, double x, double l) { return p.phi(x, l); }

double eval_h(const ExcitationProfile& p, double x, double l) { return p.h(x, l); }

double delta_total(const ExcitationProfile& p, double x) {
    if (p.kind == ProfileKind::space_damped)
        return damp_factor(p, x) * delta_total(*p.inner, 0.0);
    if (std::isfinite(p.settle_l)) return p.h(x, p.settle_l);
    if (p.tail) return p.tail->h_inf;
    throw std::logic_error("delta_total: profile lacks both a settle point and a tail");
}

}
