#include "ebm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ebm {

namespace {

double pairwise_range(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    const std::size_t n = hi - lo;
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += v[i];
        return s;
    }
    const std::size_t mid = lo + n / 2;
    return pairwise_range(v, lo, mid) + pairwise_range(v, mid, hi);
}

}   // namespace

double pairwise_sum(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return pairwise_range(v, 0, v.size());
}

MomentSummary summarize(const std::vector<double>& v) {
    MomentSummary s;
    s.n = v.size();
    if (v.empty()) return s;
    s.mean = pairwise_sum(v) / static_cast<double>(v.size());
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = v[i] - s.mean;
        sq[i] = d * d;
    }
    s.variance = v.size() > 1 ? pairwise_sum(sq) / static_cast<double>(v.size() - 1) : 0.0;
    s.std_dev = std::sqrt(s.variance);
    s.std_error = s.std_dev / std::sqrt(static_cast<double>(v.size()));
    auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    s.min = *mn;
    s.max = *mx;
    return s;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
}

double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double q = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        q += sign * term;
        sign = -sign;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * q, 0.0, 1.0);
}

namespace {

double stephens_lambda(double d, double n_eff) {
    const double rn = std::sqrt(n_eff);
    return (rn + 0.12 + 0.11 / rn) * d;
}

}   // namespace

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_test: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    KsResult r;
    r.statistic = d;
    r.n = samples.size();
    r.p_value = kolmogorov_q(stephens_lambda(d, n));
    return r;
}

KsResult ks_test_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_test_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    KsResult r;
    r.statistic = d;
    const double n_eff = na * nb / (na + nb);
    r.n = static_cast<std::size_t>(n_eff);
    r.p_value = kolmogorov_q(stephens_lambda(d, n_eff));
    return r;
}

double ks_critical_value(double alpha, double n_eff) {
    double c;
    if (alpha == 0.05)
        c = 1.3581;
    else if (alpha == 0.01)
        c = 1.6276;
    else
        throw std::invalid_argument("ks_critical_value: alpha must be 0.05 or 0.01");
    return c / std::sqrt(n_eff);
}

}
