#include "ebm/rayknight.hpp"

#include <cmath>
#include <stdexcept>

#include "ebm/criteria.hpp"
#include "ebm/rng.hpp"
#include "ebm/stats.hpp"

namespace ebm {

namespace {

std::size_t checked_steps(double a, double dx) {
    if (!(dx > 0.0) || !std::isfinite(dx))
        throw std::invalid_argument("simulate_z: dx must be positive and finite");
    if (!(a > 0.0) || !std::isfinite(a))
        throw std::invalid_argument("simulate_z: a must be positive and finite");
    const double n_real = a / dx;
    const auto n = static_cast<std::size_t>(std::llround(n_real));
    if (n == 0 || std::abs(static_cast<double>(n) - n_real) > 1e-9 * n_real)
        throw std::invalid_argument("simulate_z: a must be a multiple of dx");
    return n;
}

// one full-truncation step from z at spatial position x (distance from 0)
inline double z_step(const ExcitationProfile& p, bool homogeneous, double a, double x, double z,
                     double dx, double sqrt_dx, Rng& rng) {
    const double zp = z > 0.0 ? z : 0.0;
    const double hval = homogeneous ? p.h(0.0, zp) : p.h(a - x, zp);
    const double next = z + 2.0 * std::sqrt(zp) * sqrt_dx * rng.gauss() + 2.0 * (1.0 - hval) * dx;
    return next > 0.0 ? next : 0.0;
}

}  // namespace

ZPath simulate_z(const ExcitationProfile& p, double a, double dx, std::uint64_t seed) {
    const std::size_t n = checked_steps(a, dx);
    const double sqrt_dx = std::sqrt(dx);

    ZPath out;
    out.dx = dx;
    out.a = a;
    out.seed = seed;
    out.z.reserve(n + 1);
    out.z.push_back(0.0);

    Rng rng(seed);
    double z = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        z = z_step(p, p.homogeneous, a, static_cast<double>(k) * dx, z, dx, sqrt_dx, rng);
        out.z.push_back(z);
    }
    return out;
}

std::vector<double> terminal_samples(const ExcitationProfile& p, double a, std::size_t n_paths,
                                     double dx, std::uint64_t master_seed) {
    const std::size_t n = checked_steps(a, dx);
    const double sqrt_dx = std::sqrt(dx);

    std::vector<double> out;
    out.reserve(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
        Rng rng(stream_seed(master_seed, i));
        double z = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            z = z_step(p, p.homogeneous, a, static_cast<double>(k) * dx, z, dx, sqrt_dx, rng);
        out.push_back(z);
    }
    return out;
}

double hitting_time_functional(const ZPath& zp) {
    if (zp.z.size() < 2) return 0.0;
    std::vector<double> terms;
    terms.reserve(zp.z.size());
    for (std::size_t k = 0; k < zp.z.size(); ++k) {
        const double w = (k == 0 || k + 1 == zp.z.size()) ? 0.5 : 1.0;
        terms.push_back(w * zp.z[k] * zp.dx);
    }
    return pairwise_sum(terms);
}

InvariantComparison compare_invariant(const std::vector<double>& samples,
                                      const ExcitationProfile& p) {
    InvariantLaw law(p);  // throws infinite_measure_error when pi is not normalizable

    InvariantComparison out;
    out.pi_mean = law.mean().value_or(std::numeric_limits<double>::quiet_NaN());
    out.sample_mean = summarize(samples).mean;
    const KsResult ks = ks_test(samples, [&law](double x) { return law.cdf(x); });
    out.ks_statistic = ks.statistic;
    out.ks_p_value = ks.p_value;
    return out;
}

double besq2_endpoint(double x, std::uint64_t seed) {
    Rng rng(seed);
    return 2.0 * x * rng.exponential();
}

}
