#pragma once

#include <cstdint>
#include <vector>

#include "ebm/ensemble.hpp"

namespace ebm {

// Cookie environment of the discrete excited random walk: on the k-th visit
// to a site the walk steps +1 with probability p[k-1], and with probability
// 1/2 once the list is exhausted. The same stack sits at every site.
struct CookieEnvironment {
    std::vector<double> p;

    void validate() const;
};

// total drift stored per site: sum_i (2 p_i - 1)
double delta_discrete(const CookieEnvironment& env);

struct WalkSample {
    std::int64_t x_final = 0;
    std::int64_t n_steps = 0;
    std::uint64_t seed = 0;

    // dense visit counters; visits[i] belongs to site lo_site + i
    std::int64_t lo_site = 0;
    std::vector<std::int32_t> visits;

    // positions every trace_stride steps (first and last always included);
    // empty when tracing is off
    std::vector<std::int64_t> trace_x;

    std::int64_t visit_count(std::int64_t site) const;
};

WalkSample simulate_walk(const CookieEnvironment& env, std::int64_t n_steps, std::uint64_t seed,
                         std::int64_t trace_stride = 0);

// ensemble mean of X_n/n; statistic = fraction of paths ending right of 0.
// The only gate a finite run supports: for |delta| > 1 the sign of the mean
// displacement must match the sign of delta; weaker environments pass as-is.
EnsembleSummary erw_ensemble(const CookieEnvironment& env, std::int64_t n_steps,
                             std::size_t n_paths, std::uint64_t master_seed, int jobs = 1);

}
