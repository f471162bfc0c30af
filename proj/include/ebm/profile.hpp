#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ebm/quadrature.hpp"

namespace ebm {

enum class ProfileKind {
    single_cookie,
    piecewise_cookies,
    exp_decay,
    log_critical,
    custom_table,
    truncated,
    space_damped,   // library-internal: spatially damped wrapper, not a CLI family
};

// Declared tail behaviour of the cumulative excitation h(l) as l -> inf:
// h(l) = h_inf + log_coeff / ln(l) + o(1/ln l). log_coeff = 0 means h settles
// exactly (or beyond double precision) at finite l.
struct TailInfo {
    double h_inf = 0.0;
    double log_coeff = 0.0;
};

// Excitation profile phi(x, l) together with its cumulative h(x, l) and the
// metadata classification relies on. Instances are immutable after the factory
// returns; all caches are frozen at construction, so concurrent reads are safe.
struct ExcitationProfile {
    ProfileKind kind = ProfileKind::single_cookie;

    double delta = 0.0;   // single_cookie / exp_decay total mass
    double rate = 0.0;    // exp_decay decay rate
    double alpha = 0.0;   // log_critical coefficient
    std::vector<double> boundaries;   // piecewise_cookies: 0 = b_0 < ... < b_K
    std::vector<double> heights;      // piecewise_cookies: phi on [b_{i-1}, b_i)
    std::vector<double> table_l;      // custom_table knots, table_l[0] = 0
    std::vector<double> table_phi;    // custom_table phi values at knots
    std::shared_ptr<const ExcitationProfile> inner;   // truncated / space_damped
    double trunc_level = 0.0;   // truncated: phi zeroed for l > trunc_level
    double space_scale = 0.0;   // space_damped: phi scaled by 1/(1 + |x|/space_scale)

    double sign = 1.0;   // -1 for reflected profiles

    bool homogeneous = true;   // phi(x, l) independent of x
    bool nonneg = false;       // phi >= 0 everywhere
    bool nonpos = false;       // phi <= 0 everywhere
    double bound = 0.0;        // upper bound for sup |phi| (tight except log_critical)
    std::optional<TailInfo> tail;      // declared asymptotics of h (signed)
    double settle_l = 0.0;             // h(l) constant for l >= settle_l (inf if never)
    std::vector<double> breakpoints;   // kinks of l -> h(l), quadrature split points
    std::string id;                    // canonical display / report id

    // cumulative excitation h(x, l) = int_0^l phi(x, u) du, closed form per family
    double h(double x, double l) const;
    double phi(double x, double l) const;

    // log_critical: frozen antiderivative table for the smooth part of
    // G(x) = int_0^x dl / ((1+l) ln(e+l))
    std::shared_ptr<const CumulativeFunction> log_crit_cache;

    // cumulative h and H = int h(l)/l dl at family knots
    // (custom_table knots / piecewise boundaries)
    std::vector<double> knot_h;
    std::vector<double> knot_big_h;
};

ExcitationProfile make_single_cookie(double delta);
ExcitationProfile make_piecewise_cookies(std::vector<double> boundaries,
                                         std::vector<double> heights);
ExcitationProfile make_exp_decay(double delta, double rate);
ExcitationProfile make_log_critical(double alpha);
ExcitationProfile make_custom_table(std::vector<double> l, std::vector<double> phi);
ExcitationProfile make_truncated(ExcitationProfile inner, double level);
ExcitationProfile make_space_damped(ExcitationProfile inner, double scale);

// phi_tilde(x, l) = -phi(-x, l); for homogeneous profiles this is the negation
ExcitationProfile reflected(ExcitationProfile p);

// Parses a two-column CSV (l, phi) with strictly increasing l starting at 0.
// Lines that are empty or start with '#' are skipped; an optional header row is
// tolerated. Errors carry the path and 1-based row number.
ExcitationProfile load_table_csv(const std::string& path);

double eval_phi(const ExcitationProfile& p, double x, double l);
double eval_h(const ExcitationProfile& p, double x, double l);

// Total excitation mass delta^x(phi) = lim_{l -> inf} h(x, l); exact for every
// built-in family (all have bounded h).
double delta_total(const ExcitationProfile& p, double x);

}
