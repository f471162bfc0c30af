#include "ebm/sde.hpp"

#include <cmath>
#include <stdexcept>

#include "ebm/rng.hpp"
#include "ebm/stats.hpp"

namespace ebm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// fraction theta in [0,1] of the segment x -> x_new at which level is crossed,
// or a negative value when the segment does not touch the level
double crossing_fraction(double x, double x_new, double level) {
    if (x == level) return 0.0;
    if ((x - level) * (x_new - level) > 0.0) return -1.0;
    if (x_new == x) return -1.0;
    return (level - x) / (x_new - x);
}

}  // namespace

Region Region::positive() { return Region{0.0, kInf}; }
Region Region::negative() { return Region{-kInf, 0.0}; }
Region Region::unit(std::int64_t k) {
    const double lo = static_cast<double>(k);
    return Region{lo, lo + 1.0};
}

StopRule StopRule::horizon() { return StopRule{}; }
StopRule StopRule::hit_level(double a) {
    StopRule r;
    r.kind = StopKind::hit_level;
    r.level = a;
    return r;
}
StopRule StopRule::hit_either(double lower, double upper) {
    StopRule r;
    r.kind = StopKind::hit_either;
    r.lower = lower;
    r.upper = upper;
    return r;
}

double SimConfig::resolved_bin_width() const {
    return bin_width > 0.0 ? bin_width : 10.0 * std::sqrt(dt);
}

void SimConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("SimConfig: dt must be positive and finite");
    if (!(t_max > 0.0) || !std::isfinite(t_max))
        throw std::invalid_argument("SimConfig: t_max must be positive and finite");
    if (!std::isfinite(x0)) throw std::invalid_argument("SimConfig: x0 must be finite");
    if (bin_width != 0.0) {
        if (!std::isfinite(bin_width) || bin_width < 4.0 * std::sqrt(dt))
            throw std::invalid_argument("SimConfig: bin_width must be >= 4*sqrt(dt)");
    }
    if (record_stride < 0) throw std::invalid_argument("SimConfig: record_stride must be >= 0");
    if (stop.kind == StopKind::hit_level && !std::isfinite(stop.level))
        throw std::invalid_argument("SimConfig: stop level must be finite");
    if (stop.kind == StopKind::hit_either &&
        (!std::isfinite(stop.lower) || !std::isfinite(stop.upper) || !(stop.lower < stop.upper)))
        throw std::invalid_argument("SimConfig: hit_either needs finite lower < upper");
    for (double lv : watch_levels)
        if (!std::isfinite(lv)) throw std::invalid_argument("SimConfig: watch level must be finite");
    for (const Region& r : regions)
        if (!(r.lo < r.hi)) throw std::invalid_argument("SimConfig: region needs lo < hi");
    for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
        const double ts = snapshot_times[i];
        if (!std::isfinite(ts) || ts < 0.0 || ts > t_max)
            throw std::invalid_argument("SimConfig: snapshot times must lie in [0, t_max]");
        if (i > 0 && !(ts > snapshot_times[i - 1]))
            throw std::invalid_argument("SimConfig: snapshot times must be strictly increasing");
    }
}

namespace {

template <class DriftFn>
PathSample run_path(const SimConfig& cfg, std::uint64_t seed, DriftFn&& drift_at) {
    cfg.validate();

    const double dt = cfg.dt;
    const double dx = cfg.resolved_bin_width();
    const double sqrt_dt = std::sqrt(dt);

    PathSample out;
    out.seed = seed;
    out.config = cfg;
    out.config.bin_width = dx;  // echo the resolved value
    out.local_time = LocalTimeField(dx);
    out.drift_region.assign(cfg.regions.size(), 0.0);
    out.region_last_time.assign(cfg.regions.size(), -kInf);

    out.hit_level = cfg.watch_levels;
    auto watch = [&out](double lv) {
        for (double have : out.hit_level)
            if (have == lv) return;
        out.hit_level.push_back(lv);
    };
    if (cfg.stop.kind == StopKind::hit_level) watch(cfg.stop.level);
    if (cfg.stop.kind == StopKind::hit_either) {
        watch(cfg.stop.lower);
        watch(cfg.stop.upper);
    }
    out.hit_time.assign(out.hit_level.size(), kInf);

    Rng rng(seed);
    double x = cfg.x0;
    out.x_min = out.x_max = x;

    for (std::size_t i = 0; i < out.hit_level.size(); ++i)
        if (out.hit_level[i] == x) out.hit_time[i] = 0.0;

    const bool tracing = cfg.record_stride > 0;
    if (tracing) {
        out.record_t.push_back(0.0);
        out.record_x.push_back(x);
    }

    out.snapshot_x.assign(cfg.snapshot_times.size(), x);
    std::size_t next_snap = 0;
    while (next_snap < cfg.snapshot_times.size() && cfg.snapshot_times[next_snap] <= 0.0) {
        out.snapshot_x[next_snap] = x;
        ++next_snap;
    }

    // start already on a stop level
    if ((cfg.stop.kind == StopKind::hit_level && x == cfg.stop.level) ||
        (cfg.stop.kind == StopKind::hit_either && (x == cfg.stop.lower || x == cfg.stop.upper))) {
        out.stopped = true;
        out.t_final = 0.0;
        out.x_final = x;
        return out;
    }

    const std::int64_t n_full = static_cast<std::int64_t>(std::floor(cfg.t_max / dt + 1e-9));
    double t_rem = cfg.t_max - static_cast<double>(n_full) * dt;
    if (!(t_rem > dt * 1e-9)) t_rem = 0.0;
    const std::int64_t n_steps = n_full + (t_rem > 0.0 ? 1 : 0);

    bool done = false;
    for (std::int64_t k = 0; k < n_steps && !done; ++k) {
        const bool partial = (k == n_full);
        const double step_dt = partial ? t_rem : dt;
        const double step_sd = partial ? std::sqrt(t_rem) : sqrt_dt;
        const double t_k = static_cast<double>(k) * dt;

        const std::int64_t bin = out.local_time.bin_index(x);
        const double lhat = out.local_time.occupation(bin) / dx;
        const double drift = drift_at(x, lhat);
        const double x_new = x + step_sd * rng.gauss() + drift * step_dt;

        // stop rule crossing within this step
        double theta_stop = -1.0;
        double stop_at = 0.0;
        if (cfg.stop.kind == StopKind::hit_level) {
            theta_stop = crossing_fraction(x, x_new, cfg.stop.level);
            stop_at = cfg.stop.level;
        } else if (cfg.stop.kind == StopKind::hit_either) {
            const double tl = crossing_fraction(x, x_new, cfg.stop.lower);
            const double tu = crossing_fraction(x, x_new, cfg.stop.upper);
            if (tl >= 0.0 && (tu < 0.0 || tl <= tu)) {
                theta_stop = tl;
                stop_at = cfg.stop.lower;
            } else if (tu >= 0.0) {
                theta_stop = tu;
                stop_at = cfg.stop.upper;
            }
        }

        const double fraction = theta_stop >= 0.0 ? theta_stop : 1.0;
        const double dt_eff = fraction * step_dt;

        while (next_snap < cfg.snapshot_times.size() &&
               cfg.snapshot_times[next_snap] <= t_k + dt_eff + 1e-12 * dt) {
            double th = (cfg.snapshot_times[next_snap] - t_k) / step_dt;
            if (th < 0.0) th = 0.0;
            if (th > fraction) th = fraction;
            out.snapshot_x[next_snap] = x + th * (x_new - x);
            ++next_snap;
        }

        // watched first hits, only up to the moment the path actually exists
        for (std::size_t i = 0; i < out.hit_level.size(); ++i) {
            if (out.hit_time[i] < kInf) continue;
            const double th = crossing_fraction(x, x_new, out.hit_level[i]);
            if (th >= 0.0 && th <= fraction) out.hit_time[i] = t_k + th * step_dt;
        }

        // occupation and drift accounting at the pre-step state
        out.local_time.add_bin(bin, dt_eff);
        out.drift_total += drift * dt_eff;
        for (std::size_t i = 0; i < cfg.regions.size(); ++i) {
            if (cfg.regions[i].contains(x)) {
                out.drift_region[i] += drift * dt_eff;
                out.region_last_time[i] = t_k;
            }
        }

        if (theta_stop >= 0.0) {
            out.stopped = true;
            out.t_final = t_k + dt_eff;
            x = stop_at;
            done = true;
        } else {
            x = x_new;
            out.t_final = partial ? cfg.t_max : t_k + dt;
        }

        if (x < out.x_min) out.x_min = x;
        if (x > out.x_max) out.x_max = x;
        if (tracing && (done || k + 1 == n_steps || (k + 1) % cfg.record_stride == 0)) {
            out.record_t.push_back(out.t_final);
            out.record_x.push_back(x);
        }
    }

    if (cfg.stop.kind == StopKind::horizon) out.stopped = true;
    for (; next_snap < cfg.snapshot_times.size(); ++next_snap) out.snapshot_x[next_snap] = x;
    out.x_final = x;
    return out;
}

}  // namespace

PathSample simulate_path(const ExcitationProfile& p, const SimConfig& cfg, std::uint64_t seed) {
    // single_cookie dominates the long ensemble runs; inline its drift so the
    // step loop avoids the general profile dispatch (same arithmetic, same bits)
    if (p.kind == ProfileKind::single_cookie) {
        const double amp = p.sign * p.delta;
        return run_path(cfg, seed, [amp](double, double l) { return l <= 1.0 ? amp : 0.0; });
    }
    return run_path(cfg, seed, [&p](double x, double l) { return p.phi(x, l); });
}

double drift_functional(const PathSample& s, const Region& region) {
    for (std::size_t i = 0; i < s.config.regions.size(); ++i) {
        const Region& r = s.config.regions[i];
        if (r.lo == region.lo && r.hi == region.hi) return s.drift_region[i];
    }
    throw std::invalid_argument(
        "drift_functional: region was not registered in SimConfig.regions before the run");
}

double hitting_time(const PathSample& s, double level) {
    for (std::size_t i = 0; i < s.hit_level.size(); ++i)
        if (s.hit_level[i] == level) return s.hit_time[i];
    throw std::invalid_argument("hitting_time: level was not watched during the run");
}

double occupation_identity_residual(const PathSample& s, const ExcitationProfile& p) {
    const LocalTimeField& lt = s.local_time;
    if (lt.empty()) return std::abs(s.drift_total);
    const double dx = lt.bin_width();
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(lt.hi_bin() - lt.lo_bin() + 1));
    for (std::int64_t b = lt.lo_bin(); b <= lt.hi_bin(); ++b) {
        const double occ = lt.occupation(b);
        if (occ == 0.0) continue;
        terms.push_back(p.h(lt.bin_center(b), occ / dx) * dx);
    }
    return std::abs(s.drift_total - pairwise_sum(terms));
}

}
