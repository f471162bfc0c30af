#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "ebm/criteria.hpp"
#include "ebm/erw.hpp"
#include "ebm/profile.hpp"
#include "ebm/rng.hpp"
#include "ebm/stats.hpp"

using namespace ebm;
using doctest::Contains;

TEST_CASE("per-site drift of a cookie stack") {
    CHECK(delta_discrete(CookieEnvironment{{0.75, 0.75}}) == 1.0);
    CHECK(delta_discrete(CookieEnvironment{{}}) == 0.0);
    CHECK(delta_discrete(CookieEnvironment{{1.0, 1.0, 0.75}}) == 2.5);
    CHECK(delta_discrete(CookieEnvironment{{0.25}}) == -0.5);
}

TEST_CASE("environment validation names the offending cookie") {
    const CookieEnvironment bad{{0.5, 1.5}};
    const CookieEnvironment neg{{-0.1}};
    const CookieEnvironment ok{{0.0, 1.0, 0.5}};
    CHECK_THROWS_WITH_AS(bad.validate(), Contains("p[1]"), std::invalid_argument);
    CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
    CHECK_NOTHROW(ok.validate());
}

TEST_CASE("walks are deterministic and conserve visit counts") {
    const CookieEnvironment env{{0.75, 0.75, 0.75}};
    const auto a = simulate_walk(env, 5000, 12);
    const auto b = simulate_walk(env, 5000, 12);
    CHECK(a.x_final == b.x_final);
    CHECK(a.visits == b.visits);
    CHECK(a.x_final != simulate_walk(env, 5000, 13).x_final);

    // every step consumes exactly one visit at its departure site
    const std::int64_t total = std::accumulate(a.visits.begin(), a.visits.end(), std::int64_t{0});
    CHECK(total == 5000);
    CHECK(a.n_steps == 5000);
    CHECK(a.visit_count(0) > 0);
    CHECK(a.visit_count(a.lo_site - 1) == 0);
    CHECK(a.visit_count(1'000'000) == 0);
    CHECK(a.trace_x.empty());

    CHECK_THROWS_AS((void)simulate_walk(env, -1, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)simulate_walk(env, 10, 1, -2), std::invalid_argument);
}

TEST_CASE("trace includes the endpoints") {
    const CookieEnvironment env{{0.9}};
    const auto w = simulate_walk(env, 1000, 3, 300);
    // positions at steps 0, 300, 600, 900, 1000
    REQUIRE(w.trace_x.size() == 5);
    CHECK(w.trace_x.front() == 0);
    CHECK(w.trace_x.back() == w.x_final);

    const auto aligned = simulate_walk(env, 900, 3, 300);
    REQUIRE(aligned.trace_x.size() == 4);  // 0, 300, 600, 900 with no duplicate tail
    CHECK(aligned.trace_x.back() == aligned.x_final);
}

TEST_CASE("speed is monotone in the cookie strength") {
    const std::int64_t n_steps = 20000;
    const std::size_t n_paths = 300;
    std::vector<double> mean, se;
    for (double delta : {0.5, 1.5, 2.5, 4.0}) {
        const double p = 0.5 + delta / 8.0;  // four cookies of strength (2p-1)
        const CookieEnvironment env{{p, p, p, p}};
        CHECK(delta_discrete(env) == doctest::Approx(delta).epsilon(1e-12));
        std::vector<double> ratio(n_paths);
        for (std::size_t i = 0; i < n_paths; ++i)
            ratio[i] = static_cast<double>(simulate_walk(env, n_steps, stream_seed(71, i)).x_final) /
                       static_cast<double>(n_steps);
        const auto m = summarize(ratio);
        mean.push_back(m.mean);
        se.push_back(m.std_error);
    }
    for (std::size_t k = 1; k < mean.size(); ++k)
        CHECK(mean[k] >= mean[k - 1] - 2.0 * (se[k] + se[k - 1]));
    CHECK(std::fabs(mean.front()) < 0.05);   // recurrent regime crawls
    CHECK(mean.back() > mean[1] + 0.05);     // ballistic regime separates
}

TEST_CASE("discrete regimes line up with the continuous verdicts") {
    // ballistic on both sides of the mirror
    const auto right = erw_ensemble(CookieEnvironment{{1.0, 1.0, 0.75}}, 20000, 200, 81);
    CHECK(classify(make_single_cookie(2.5)).verdict == Verdict::TRANSIENT_RIGHT);
    CHECK(right.pass);
    CHECK(right.estimate > 0.0);
    CHECK(right.statistic > 0.9);
    CHECK(right.profile_id == "cookies(delta=2.500000)");
    CHECK(right.detail.find("frac_right=") != std::string::npos);

    const auto left = erw_ensemble(CookieEnvironment{{0.0, 0.0, 0.25}}, 20000, 200, 81);
    CHECK(classify(make_single_cookie(-2.5)).verdict == Verdict::TRANSIENT_LEFT);
    CHECK(left.pass);
    CHECK(left.estimate < 0.0);
    CHECK(left.statistic < 0.1);

    // plain random walk: no gate beyond running, displacement straddles 0
    const auto flat = erw_ensemble(CookieEnvironment{{}}, 20000, 400, 83);
    CHECK(classify(make_custom_table({0.0, 1.0}, {0.0, 0.0})).verdict == Verdict::RECURRENT);
    CHECK(flat.pass);
    CHECK(flat.statistic > 0.4);
    CHECK(flat.statistic < 0.6);
    CHECK(std::fabs(flat.estimate) < 0.01);

    CHECK_THROWS_AS((void)erw_ensemble(CookieEnvironment{{0.75}}, 0, 4, 1), std::invalid_argument);
}
