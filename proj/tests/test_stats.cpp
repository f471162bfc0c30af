#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ebm/rng.hpp"
#include "ebm/stats.hpp"

using namespace ebm;

TEST_CASE("pairwise_sum is accurate and order-deterministic") {
    CHECK(pairwise_sum({}) == 0.0);
    CHECK(pairwise_sum({3.25}) == 3.25);

    std::vector<double> tenths(10, 0.1);
    CHECK(pairwise_sum(tenths) == doctest::Approx(1.0).epsilon(1e-15));

    // large cancellation: pairwise stays close to the long-double reference
    std::vector<double> v;
    long double ref = 0.0L;
    for (int i = 0; i < 20000; ++i) {
        const double x = (i % 2 == 0 ? 1.0 : -1.0) * (1e8 + i) / 7.0;
        v.push_back(x);
        ref += x;
    }
    CHECK(pairwise_sum(v) == doctest::Approx(static_cast<double>(ref)).scale(1e8).epsilon(1e-12));

    // bitwise repeatable
    CHECK(pairwise_sum(v) == pairwise_sum(v));
}

TEST_CASE("summarize computes the standard moments") {
    const auto s = summarize({1.0, 2.0, 3.0, 4.0, 5.0});
    CHECK(s.n == 5);
    CHECK(s.mean == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(s.variance == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(s.std_dev == doctest::Approx(std::sqrt(2.5)).epsilon(1e-15));
    CHECK(s.std_error == doctest::Approx(std::sqrt(2.5 / 5.0)).epsilon(1e-15));
    CHECK(s.min == 1.0);
    CHECK(s.max == 5.0);

    const auto one = summarize({7.0});
    CHECK(one.n == 1);
    CHECK(one.mean == 7.0);
    CHECK(one.variance == 0.0);
}

TEST_CASE("normal cdf and pdf reference values") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-12));
    CHECK(normal_cdf(-1.96) == doctest::Approx(1.0 - 0.9750021048517795).epsilon(1e-10));
    CHECK(normal_pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
    CHECK(normal_pdf(2.0) ==
          doctest::Approx(std::exp(-2.0) * 0.3989422804014327).epsilon(1e-14));
}

TEST_CASE("one-sample KS statistic on a hand-computed case") {
    // x_i = i/10, i = 1..9 against U(0,1): D = 0.1 exactly
    std::vector<double> x;
    for (int i = 1; i <= 9; ++i) x.push_back(i / 10.0);
    const auto r = ks_test(x, [](double t) { return t; });
    CHECK(r.n == 9);
    CHECK(r.statistic == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(r.p_value > 0.99);
}

TEST_CASE("one-sample KS accepts matching and rejects mismatched laws") {
    Rng rng(2024);
    std::vector<double> u;
    for (int i = 0; i < 5000; ++i) u.push_back(rng.uniform01());

    const auto ok = ks_test(u, [](double t) { return std::clamp(t, 0.0, 1.0); });
    CHECK(ok.p_value > 0.01);
    CHECK(ok.statistic < 0.03);

    // same samples against a shifted law
    const auto bad = ks_test(u, [](double t) { return std::clamp(t * t, 0.0, 1.0); });
    CHECK(bad.p_value < 1e-6);
}

TEST_CASE("two-sample KS statistic on a hand-computed case") {
    const auto r = ks_test_two_sample({1.0, 2.0, 3.0, 4.0}, {1.5, 2.5, 3.5, 4.5});
    CHECK(r.statistic == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(r.n == 2);  // nm/(n+m)

    Rng rng(5);
    std::vector<double> a, b, c;
    for (int i = 0; i < 3000; ++i) {
        a.push_back(rng.gauss());
        b.push_back(rng.gauss());
        c.push_back(rng.gauss() + 0.25);
    }
    CHECK(ks_test_two_sample(a, b).p_value > 0.01);
    CHECK(ks_test_two_sample(a, c).p_value < 1e-6);
}

TEST_CASE("ks_critical_value uses the asymptotic constants") {
    CHECK(ks_critical_value(0.05, 100.0) == doctest::Approx(0.13581).epsilon(1e-12));
    CHECK(ks_critical_value(0.01, 100.0) == doctest::Approx(0.16276).epsilon(1e-12));
    // n_eff = 1000 for two samples of 2000: the 5% gate near 0.0429
    CHECK(ks_critical_value(0.05, 1000.0) ==
          doctest::Approx(1.3581 / std::sqrt(1000.0)).epsilon(1e-12));
    CHECK_THROWS_AS((void)ks_critical_value(0.10, 100.0), std::invalid_argument);
}

TEST_CASE("kolmogorov_q reference values") {
    CHECK(kolmogorov_q(1.0) == doctest::Approx(0.2699996716773238).epsilon(1e-9));
    // the classical 5% and 1% points
    CHECK(kolmogorov_q(1.3581) == doctest::Approx(0.05).epsilon(2e-3));
    CHECK(kolmogorov_q(1.6276) == doctest::Approx(0.01).epsilon(2e-3));
    CHECK(kolmogorov_q(0.3) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(kolmogorov_q(5.0) < 1e-10);
    // monotone decreasing
    CHECK(kolmogorov_q(0.8) > kolmogorov_q(1.2));
}
