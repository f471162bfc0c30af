#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace ebm {

// pairwise (cascade) summation: deterministic for a fixed element order and
// accurate to ~eps*log2(n) relative
double pairwise_sum(const std::vector<double>& v);

struct MomentSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;   // unbiased (n-1)
    double std_dev = 0.0;
    double std_error = 0.0;  // std_dev / sqrt(n)
    double min = 0.0;
    double max = 0.0;
};

MomentSummary summarize(const std::vector<double>& v);

double normal_cdf(double x);
double normal_pdf(double x);

struct KsResult {
    double statistic = 0.0;   // D
    double p_value = 1.0;     // asymptotic, Stephens-corrected
    std::size_t n = 0;        // effective sample size (nm/(n+m) for two-sample)
};

// one-sample KS against a cdf (samples need not be sorted)
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

// two-sample KS
KsResult ks_test_two_sample(std::vector<double> a, std::vector<double> b);

// critical D value at significance alpha (supported: 0.05, 0.01) for the
// effective sample size n_eff
double ks_critical_value(double alpha, double n_eff);

// survival function of the Kolmogorov distribution, Q(lambda) = P(K > lambda)
double kolmogorov_q(double lambda);

}
