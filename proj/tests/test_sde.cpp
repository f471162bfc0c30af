#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ebm/profile.hpp"
#include "ebm/rng.hpp"
#include "ebm/sde.hpp"
#include "ebm/stats.hpp"

using namespace ebm;

TEST_CASE("paths are deterministic in (profile, config, seed)") {
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_max = 1.0;
    const auto p = make_single_cookie(3.0);

    const auto a = simulate_path(p, cfg, 1);
    const auto b = simulate_path(p, cfg, 1);
    CHECK(a.x_final == b.x_final);
    CHECK(a.drift_total == b.drift_total);
    CHECK(a.local_time.total() == b.local_time.total());

    // regression pin for the frozen scheme (explicit Euler, box kernel,
    // pre-step read, post-step deposit)
    CHECK(a.x_final == 4.3046780369746269);
    CHECK(simulate_path(p, cfg, 2).x_final == 2.2773222872814154);
}

TEST_CASE("occupation time is conserved") {
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_max = 2.5;   // not a multiple of dt pattern; exercises the partial step
    const auto p = make_single_cookie(1.5);
    const auto s = simulate_path(p, cfg, 42);
    CHECK(s.t_final == 2.5);
    CHECK(s.local_time.total() == doctest::Approx(s.t_final).epsilon(1e-12));
    CHECK(s.x_min <= s.x_final);
    CHECK(s.x_max >= s.x_final);

    // a hit-level run conserves the (shorter) elapsed time as well
    SimConfig hc;
    hc.dt = 1e-3;
    hc.t_max = 50.0;
    hc.stop = StopRule::hit_level(1.0);
    const auto hs = simulate_path(p, hc, 42);
    REQUIRE(hs.stopped);
    CHECK(hs.x_final == 1.0);
    CHECK(hs.local_time.total() == doctest::Approx(hs.t_final).epsilon(1e-12));
}

TEST_CASE("zero drift reduces to Brownian motion") {
    const auto zero = make_custom_table({0.0, 1.0}, {0.0, 0.0});
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_max = 1.0;

    const std::size_t n = 2000;
    std::vector<double> xs(n);
    double drift_seen = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto s = simulate_path(zero, cfg, stream_seed(11, i));
        xs[i] = s.x_final;
        drift_seen += std::fabs(s.drift_total);
    }
    CHECK(drift_seen == 0.0);

    const auto mom = summarize(xs);
    CHECK(std::fabs(mom.mean) < 4.0 * mom.std_error);
    CHECK(mom.variance == doctest::Approx(1.0).epsilon(0.1));
    const auto ks = ks_test(xs, [](double x) { return normal_cdf(x); });
    CHECK(ks.p_value > 1e-3);
}

TEST_CASE("hitting times against the reflection-principle law") {
    // P(T_1 <= 1) = 2 (1 - Phi(1)) for standard BM
    const auto zero = make_custom_table({0.0, 1.0}, {0.0, 0.0});
    SimConfig cfg;
    cfg.dt = 1e-4;
    cfg.t_max = 1.0;
    cfg.stop = StopRule::hit_level(1.0);

    const std::size_t n = 2000;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto s = simulate_path(zero, cfg, stream_seed(13, i));
        const double ht = hitting_time(s, 1.0);
        if (s.stopped) {
            ++hits;
            CHECK(ht <= s.t_final + 1e-12);
            CHECK(s.x_final == 1.0);
        } else {
            CHECK(ht == std::numeric_limits<double>::infinity());
            CHECK(s.t_final == 1.0);
        }
    }
    const double want = 2.0 * (1.0 - normal_cdf(1.0));
    const double got = static_cast<double>(hits) / n;
    const double se = std::sqrt(want * (1.0 - want) / n);
    // discrete crossings miss some excursions: allow the mesh bias plus noise
    CHECK(std::fabs(got - want) <= 4.0 * se + 0.01);
}

TEST_CASE("snapshots and the trace agree") {
    const auto p = make_single_cookie(2.0);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_max = 1.0;
    cfg.record_stride = 250;
    cfg.snapshot_times = {0.25, 0.5, 1.0};

    const auto s = simulate_path(p, cfg, 5);
    REQUIRE(s.snapshot_x.size() == 3);
    REQUIRE(s.record_t.size() >= 5);   // t = 0, .25, .5, .75, 1

    bool saw_quarter = false, saw_half = false;
    for (std::size_t i = 0; i < s.record_t.size(); ++i) {
        if (std::fabs(s.record_t[i] - 0.25) < 1e-9) {
            saw_quarter = true;
            CHECK(s.record_x[i] == doctest::Approx(s.snapshot_x[0]).epsilon(1e-9));
        }
        if (std::fabs(s.record_t[i] - 0.5) < 1e-9) {
            saw_half = true;
            CHECK(s.record_x[i] == doctest::Approx(s.snapshot_x[1]).epsilon(1e-9));
        }
    }
    CHECK(saw_quarter);
    CHECK(saw_half);
    CHECK(s.snapshot_x[2] == doctest::Approx(s.x_final).epsilon(1e-12));
    CHECK(s.record_t.front() == 0.0);
    CHECK(s.record_t.back() == s.t_final);
    CHECK(s.record_x.back() == s.x_final);

    // snapshots past an early stop freeze at the stopped position
    SimConfig hc = cfg;
    hc.record_stride = 0;
    hc.stop = StopRule::hit_level(0.5);
    hc.t_max = 10.0;
    hc.snapshot_times = {9.5};
    const auto hs = simulate_path(p, hc, 5);
    if (hs.stopped && hs.t_final < 9.5) CHECK(hs.snapshot_x[0] == hs.x_final);
    CHECK(hs.record_t.empty());
}

TEST_CASE("region drift accounting") {
    const auto p = make_single_cookie(3.0);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_max = 2.0;
    cfg.regions = {Region::positive(), Region::negative(), Region::unit(0)};

    const auto s = simulate_path(p, cfg, 9);
    const double pos = drift_functional(s, Region::positive());
    const double neg = drift_functional(s, Region::negative());
    const double unit0 = drift_functional(s, Region::unit(0));

    // the two half-lines partition everything except exact zero hits
    CHECK(std::fabs(pos + neg - s.drift_total) <= 3.0 * cfg.dt * 4.0);
    // (0,1) is inside (0,inf) and all drift is nonnegative
    CHECK(unit0 >= 0.0);
    CHECK(unit0 <= pos + 1e-12);
    CHECK(s.drift_total > 0.0);

    CHECK_THROWS_AS((void)drift_functional(s, Region::unit(5)), std::invalid_argument);
    CHECK_THROWS_AS((void)hitting_time(s, 123.0), std::invalid_argument);

    // last visit time tracks the pre-step clock
    const std::size_t pos_idx = 0;
    CHECK(s.region_last_time[pos_idx] >= 0.0);
    CHECK(s.region_last_time[pos_idx] < s.t_final);
}

TEST_CASE("starting on a stop level returns immediately") {
    const auto p = make_single_cookie(1.0);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_max = 1.0;
    cfg.stop = StopRule::hit_level(0.0);
    const auto s = simulate_path(p, cfg, 3);
    CHECK(s.stopped);
    CHECK(s.t_final == 0.0);
    CHECK(s.x_final == 0.0);
    CHECK(hitting_time(s, 0.0) == 0.0);

    SimConfig ec = cfg;
    ec.stop = StopRule::hit_either(-1.0, 1.0);
    ec.x0 = 1.0;
    const auto es = simulate_path(p, ec, 3);
    CHECK(es.stopped);
    CHECK(es.t_final == 0.0);
}

TEST_CASE("hit_either stops at the first boundary touched") {
    const auto zero = make_custom_table({0.0, 1.0}, {0.0, 0.0});
    SimConfig cfg;
    cfg.dt = 1e-4;
    cfg.t_max = 100.0;
    cfg.stop = StopRule::hit_either(-0.5, 1.5);

    std::size_t upper = 0, total = 0;
    for (std::size_t i = 0; i < 400; ++i) {
        const auto s = simulate_path(zero, cfg, stream_seed(17, i));
        REQUIRE(s.stopped);
        REQUIRE((s.x_final == -0.5 || s.x_final == 1.5));
        if (s.x_final == 1.5) ++upper;
        ++total;
    }
    // gambler's ruin from 0: P(upper) = 0.5 / 2.0 = 0.25
    const double got = static_cast<double>(upper) / static_cast<double>(total);
    CHECK(std::fabs(got - 0.25) <= 4.0 * std::sqrt(0.25 * 0.75 / 400.0) + 0.01);
}

TEST_CASE("occupation identity residual shrinks with the step") {
    const auto p = make_single_cookie(3.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double dt : {1e-3, 1e-4}) {
        double rel = 0.0;
        const int reps = 3;
        for (int i = 0; i < reps; ++i) {
            SimConfig cfg;
            cfg.dt = dt;
            cfg.t_max = 5.0;
            const auto s = simulate_path(p, cfg, stream_seed(23, static_cast<std::uint64_t>(i)));
            rel += occupation_identity_residual(s, p) / std::max(std::fabs(s.drift_total), 1e-12);
        }
        rel /= reps;
        CHECK(rel < prev);
        prev = rel;
    }
    CHECK(prev < 0.1);
}

TEST_CASE("config validation rejects malformed setups") {
    const auto p = make_single_cookie(1.0);
    SimConfig bad;
    bad.dt = 0.0;
    CHECK_THROWS_AS((void)simulate_path(p, bad, 1), std::invalid_argument);

    SimConfig narrow;
    narrow.dt = 1e-2;
    narrow.bin_width = 0.1;   // < 4 sqrt(dt) = 0.4
    CHECK_THROWS_AS((void)simulate_path(p, narrow, 1), std::invalid_argument);

    SimConfig flip;
    flip.stop = StopRule::hit_either(1.0, -1.0);
    CHECK_THROWS_AS((void)simulate_path(p, flip, 1), std::invalid_argument);

    SimConfig snaps;
    snaps.snapshot_times = {0.5, 0.25};
    CHECK_THROWS_AS((void)simulate_path(p, snaps, 1), std::invalid_argument);

    SimConfig late;
    late.t_max = 1.0;
    late.snapshot_times = {2.0};
    CHECK_THROWS_AS((void)simulate_path(p, late, 1), std::invalid_argument);

    SimConfig region;
    region.regions = {Region{2.0, 2.0}};
    CHECK_THROWS_AS((void)simulate_path(p, region, 1), std::invalid_argument);
}

TEST_CASE("excited drift pushes the cookie walk right") {
    const auto p = make_single_cookie(3.0);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_max = 20.0;
    const std::size_t n = 200;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        mean += simulate_path(p, cfg, stream_seed(31, i)).x_final;
    mean /= static_cast<double>(n);
    // ballistic at v ~ 2.46; even with mesh bias the mean sits far above 0
    CHECK(mean / 20.0 > 1.5);
    CHECK(mean / 20.0 < 3.5);
}
