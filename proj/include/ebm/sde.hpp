#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "ebm/local_time.hpp"
#include "ebm/profile.hpp"

namespace ebm {

// open interval (lo, hi); half-lines use +-infinity
struct Region {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double x) const { return x > lo && x < hi; }

    static Region positive();            // (0, +inf)
    static Region negative();            // (-inf, 0)
    static Region unit(std::int64_t k);  // (k, k+1)
};

enum class StopKind { horizon, hit_level, hit_either };

struct StopRule {
    StopKind kind = StopKind::horizon;
    double level = 0.0;                // hit_level target
    double lower = 0.0, upper = 0.0;   // hit_either pair, lower < upper

    static StopRule horizon();
    static StopRule hit_level(double a);
    static StopRule hit_either(double lower, double upper);
};

struct SimConfig {
    double dt = 1e-4;
    double bin_width = 0.0;  // 0 resolves to 10*sqrt(dt)
    double t_max = 100.0;    // horizon; also the guard for hitting rules
    double x0 = 0.0;
    StopRule stop{};
    std::int64_t record_stride = 0;      // 0 = keep no trace
    std::vector<double> watch_levels;    // extra levels whose first hits are recorded
    std::vector<Region> regions;         // drift functionals accumulated on-line
    std::vector<double> snapshot_times;  // ascending times at which X is sampled

    double resolved_bin_width() const;
    void validate() const;  // throws std::invalid_argument
};

struct PathSample {
    std::vector<double> record_t;
    std::vector<double> record_x;
    LocalTimeField local_time{0.1};

    double drift_total = 0.0;
    std::vector<double> drift_region;      // parallel to config.regions
    std::vector<double> region_last_time;  // last pre-step time inside, -inf if never

    std::vector<double> hit_level;  // watch_levels then any stop levels
    std::vector<double> hit_time;   // first hit, +inf when not reached

    std::vector<double> snapshot_x;  // X at config.snapshot_times (final x past a stop)

    double t_final = 0.0;
    double x_final = 0.0;
    double x_min = 0.0;
    double x_max = 0.0;
    bool stopped = false;  // stop rule fired before the horizon

    std::uint64_t seed = 0;
    SimConfig config;
};

// Explicit Euler step X' = X + sqrt(dt)*xi + phi(X, Lhat)*dt with the local
// time read at X's bin before the step and dt deposited into that bin after
// it. Deterministic for fixed (profile, config, seed).
PathSample simulate_path(const ExcitationProfile& p, const SimConfig& cfg, std::uint64_t seed);

// Drift accumulated inside a region registered in config.regions before the
// run; throws std::invalid_argument for an unregistered region.
double drift_functional(const PathSample& s, const Region& region);

// First hitting time of a watched (or stop-rule) level; +inf when the level
// was not reached. Throws std::invalid_argument for an unwatched level.
double hitting_time(const PathSample& s, double level);

// |D_t (time-integral form) - sum_bins h(center, occupation/dx)*dx|
double occupation_identity_residual(const PathSample& s, const ExcitationProfile& p);

}
