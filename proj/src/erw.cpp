#include "ebm/erw.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ebm/rng.hpp"
#include "ebm/stats.hpp"

namespace ebm {

void CookieEnvironment::validate() const {
    for (std::size_t i = 0; i < p.size(); ++i)
        if (!(p[i] >= 0.0 && p[i] <= 1.0))
            throw std::invalid_argument("CookieEnvironment: p[" + std::to_string(i) +
                                        "] must lie in [0,1]");
}

double delta_discrete(const CookieEnvironment& env) {
    env.validate();
    double d = 0.0;
    for (double pi : env.p) d += 2.0 * pi - 1.0;
    return d;
}

std::int64_t WalkSample::visit_count(std::int64_t site) const {
    if (site < lo_site || site >= lo_site + static_cast<std::int64_t>(visits.size())) return 0;
    return visits[static_cast<std::size_t>(site - lo_site)];
}

WalkSample simulate_walk(const CookieEnvironment& env, std::int64_t n_steps, std::uint64_t seed,
                         std::int64_t trace_stride) {
    env.validate();
    if (n_steps < 0) throw std::invalid_argument("simulate_walk: n_steps must be >= 0");
    if (trace_stride < 0) throw std::invalid_argument("simulate_walk: trace_stride must be >= 0");

    WalkSample out;
    out.n_steps = n_steps;
    out.seed = seed;

    const std::int64_t m = static_cast<std::int64_t>(env.p.size());
    Rng rng(seed);

    std::int64_t x = 0;
    std::vector<std::int32_t>& visits = out.visits;
    std::int64_t lo = 0;
    visits.assign(1, 0);

    const bool tracing = trace_stride > 0;
    if (tracing) out.trace_x.push_back(x);

    for (std::int64_t k = 0; k < n_steps; ++k) {
        // arrival counts as a visit; the walk starts with its first visit to 0
        const std::int64_t idx = x - lo;
        const std::int32_t visit = ++visits[static_cast<std::size_t>(idx)];
        const double p_right = visit <= m ? env.p[static_cast<std::size_t>(visit - 1)] : 0.5;
        x += rng.uniform01() < p_right ? 1 : -1;

        if (x < lo) {
            const std::int64_t pad = std::max<std::int64_t>(
                static_cast<std::int64_t>(visits.size()) / 2, 16);
            visits.insert(visits.begin(), static_cast<std::size_t>(pad), 0);
            lo -= pad;
        } else if (x - lo >= static_cast<std::int64_t>(visits.size())) {
            const std::int64_t pad = std::max<std::int64_t>(
                static_cast<std::int64_t>(visits.size()) / 2, 16);
            visits.resize(visits.size() + static_cast<std::size_t>(pad), 0);
        }
        if (tracing && ((k + 1) % trace_stride == 0 || k + 1 == n_steps))
            out.trace_x.push_back(x);
    }

    out.x_final = x;
    out.lo_site = lo;
    return out;
}

EnsembleSummary erw_ensemble(const CookieEnvironment& env, std::int64_t n_steps,
                             std::size_t n_paths, std::uint64_t master_seed, int jobs) {
    if (n_steps <= 0) throw std::invalid_argument("erw_ensemble: n_steps must be > 0");
    const double delta = delta_discrete(env);

    auto res = parallel_paths<std::int64_t>(n_paths, jobs, [&](std::size_t i) {
        return simulate_walk(env, n_steps, stream_seed(master_seed, i)).x_final;
    });

    std::vector<double> ratio;
    ratio.reserve(n_paths);
    std::size_t positive = 0;
    for (std::int64_t xf : res) {
        ratio.push_back(static_cast<double>(xf) / static_cast<double>(n_steps));
        if (xf > 0) ++positive;
    }
    const MomentSummary m = summarize(ratio);

    EnsembleSummary out;
    out.experiment = "erw";
    out.profile_id = "cookies(delta=" + std::to_string(delta) + ")";
    out.estimator = "mean X_n/n";
    out.n_paths = n_paths;
    out.estimate = m.mean;
    out.std_error = m.std_error;
    out.statistic = static_cast<double>(positive) / static_cast<double>(n_paths);
    out.p_value = std::numeric_limits<double>::quiet_NaN();
    out.master_seed = master_seed;
    out.pass = std::abs(delta) <= 1.0 || (delta > 0.0 ? m.mean > 0.0 : m.mean < 0.0);
    out.detail = "n_steps=" + std::to_string(n_steps) + "; delta=" + std::to_string(delta) +
                 "; frac_right=" + std::to_string(out.statistic);
    return out;
}

}
