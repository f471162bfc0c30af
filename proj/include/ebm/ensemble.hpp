#pragma once

#include <atomic>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "ebm/profile.hpp"
#include "ebm/sde.hpp"

namespace ebm {

struct EnsembleSummary {
    std::string experiment;
    std::string profile_id;
    std::string estimator;
    std::size_t n_paths = 0;
    std::size_t n_failed = 0;  // paths that ran into the horizon guard
    double estimate = std::numeric_limits<double>::quiet_NaN();
    double std_error = std::numeric_limits<double>::quiet_NaN();
    double statistic = std::numeric_limits<double>::quiet_NaN();  // KS D where applicable
    double p_value = std::numeric_limits<double>::quiet_NaN();
    double confidence_level = 0.997;  // the 3-sigma band used by pass rules
    bool pass = false;
    std::uint64_t master_seed = 0;
    std::string detail;  // per-verifier extras, "key=value; ..." text
};

std::string summary_csv_header();
std::string summary_csv_row(const EnsembleSummary& s);

// Deterministic parallel map over path indices: fn(i) runs on one of `jobs`
// workers, results land in slot i, and any later reduction walks slots in
// order. Identical output for every jobs value. jobs <= 0 uses the hardware
// parallelism.
template <class T, class Fn>
std::vector<T> parallel_paths(std::size_t n, int jobs, Fn&& fn) {
    std::vector<T> out(n);
    if (n == 0) return out;
    unsigned workers = jobs > 0 ? static_cast<unsigned>(jobs) : std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    if (workers > n) workers = static_cast<unsigned>(n);
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= n) return;
                out[i] = fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
    return out;
}

// Lemma-style identity E_x[D_{T_a}] = a - x for nonneg profiles constant in x
// to the left of the start. Paths are run until T_a with base.t_max as the
// guard; guarded paths contribute their censored D (a lower-bias estimate by
// monotone convergence) and more than cap_failed_fraction of them invalidates
// the experiment (std::runtime_error, raise the horizon).
EnsembleSummary verify_drift_identity(const ExcitationProfile& p, double a, std::size_t n_paths,
                                      const SimConfig& base, std::uint64_t master_seed,
                                      int jobs = 1, double cap_failed_fraction = 0.01);

// E[D_infty^0] = 1 and E[D_infty^k] <= 1 for k = 0..4, approximated at T_M
// with re-entry accounting (paths whose last visit to (0,1) postdates T_{M/2}
// are counted in detail). Requires a profile transient to the right.
EnsembleSummary verify_d_infty(const ExcitationProfile& p, double level_m, std::size_t n_paths,
                               const SimConfig& base, std::uint64_t master_seed, int jobs = 1,
                               double bias_allowance = 0.05, double cap_failed_fraction = 0.01);

// Sample mean of X_t/t across t_grid against the classified speed. Gates the
// largest t: |mean - v| <= max(3 SE, rel_band*|v|) when v != 0. A zero-speed
// profile passes with |mean| <= zero_band, or with a clear decay of |mean|
// across the grid (strictly decreasing, final <= 0.75*initial and <= 0.6):
// transient zero-speed profiles still move like t^{mass/2} at finite t, so an
// absolute band at a reachable horizon would misread sublinear growth as
// failure. Earlier grid points and the dispersion trend go to detail.
EnsembleSummary verify_lln(const ExcitationProfile& p, const std::vector<double>& t_grid,
                           std::size_t n_paths, const SimConfig& base, std::uint64_t master_seed,
                           int jobs = 1, double rel_band = 0.05, double zero_band = 0.05);

// Normalized residuals (X_t - v t)/(sigma sqrt(t)). Gates |variance - 1| <=
// var_band and the KS of mean-centered residuals against N(0,1) at p >=
// ks_p_min; the raw (uncentered) KS and the running-sup variant are reported
// in detail. Centering removes the O(sqrt(bin_width)) mesh speed bias, which
// the |mean| <= mean_band guard keeps bounded; the quadrature speed itself is
// gated at LLN tolerance by verify_lln.
EnsembleSummary verify_clt(const ExcitationProfile& p, double t, std::size_t n_paths,
                           const SimConfig& base, std::uint64_t master_seed, int jobs = 1,
                           double var_band = 0.2, double ks_p_min = 0.01,
                           double mean_band = 0.5);

}
