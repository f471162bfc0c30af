#include "ebm/ensemble.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ebm/criteria.hpp"
#include "ebm/rng.hpp"
#include "ebm/stats.hpp"

namespace ebm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void check_failed_cap(std::size_t n_failed, std::size_t n_paths, double cap,
                      const char* experiment) {
    if (n_paths == 0) return;
    if (static_cast<double>(n_failed) > cap * static_cast<double>(n_paths))
        throw std::runtime_error(std::string(experiment) + ": " + std::to_string(n_failed) + "/" +
                                 std::to_string(n_paths) +
                                 " paths hit the horizon guard before their stopping condition; "
                                 "raise t_max");
}

}  // namespace

std::string summary_csv_header() {
    return "experiment,profile_id,n_paths,estimate,se,statistic,p_value,pass,master_seed";
}

std::string summary_csv_row(const EnsembleSummary& s) {
    std::string row;
    row += s.experiment;
    row += ",\"" + s.profile_id + "\",";
    row += std::to_string(s.n_paths) + ",";
    row += fmt("%.17g", s.estimate) + ",";
    row += fmt("%.17g", s.std_error) + ",";
    row += fmt("%.17g", s.statistic) + ",";
    row += fmt("%.17g", s.p_value) + ",";
    row += s.pass ? "1," : "0,";
    row += std::to_string(s.master_seed);
    return row;
}

EnsembleSummary verify_drift_identity(const ExcitationProfile& p, double a, std::size_t n_paths,
                                      const SimConfig& base, std::uint64_t master_seed, int jobs,
                                      double cap_failed_fraction) {
    if (!p.nonneg || !p.homogeneous)
        throw std::invalid_argument(
            "verify_drift_identity: profile must be nonnegative and homogeneous (left plateau)");
    if (!(a >= 0.0) || !std::isfinite(a))
        throw std::invalid_argument("verify_drift_identity: a must be finite and >= 0");

    SimConfig cfg = base;
    cfg.x0 = 0.0;
    cfg.stop = StopRule::hit_level(a);
    cfg.record_stride = 0;
    cfg.snapshot_times.clear();
    cfg.validate();

    struct PathRes {
        double d = 0.0;
        bool failed = false;
    };
    auto res = parallel_paths<PathRes>(n_paths, jobs, [&](std::size_t i) {
        const PathSample s = simulate_path(p, cfg, stream_seed(master_seed, i));
        return PathRes{s.drift_total, !s.stopped};
    });

    EnsembleSummary out;
    out.experiment = "drift-identity";
    out.profile_id = p.id;
    out.estimator = "E[D_{T_a}]";
    out.n_paths = n_paths;
    out.master_seed = master_seed;

    std::vector<double> d;
    d.reserve(n_paths);
    for (const auto& r : res) {
        d.push_back(r.d);
        if (r.failed) ++out.n_failed;
    }
    check_failed_cap(out.n_failed, n_paths, cap_failed_fraction, "drift-identity");

    const MomentSummary m = summarize(d);
    out.estimate = m.mean;
    out.std_error = m.std_error;
    const double allowance = 0.05 * a;
    out.pass = std::abs(m.mean - a) <= 3.0 * m.std_error + allowance;
    out.detail = "a=" + fmt("%g", a) + "; allowance=3se+" + fmt("%g", allowance) +
                 "; failed=" + std::to_string(out.n_failed);
    return out;
}

EnsembleSummary verify_d_infty(const ExcitationProfile& p, double level_m, std::size_t n_paths,
                               const SimConfig& base, std::uint64_t master_seed, int jobs,
                               double bias_allowance, double cap_failed_fraction) {
    const ClassificationReport rep = classify(p);
    if (rep.verdict != Verdict::TRANSIENT_RIGHT)
        throw std::invalid_argument(
            std::string("verify_d_infty: profile must classify TRANSIENT_RIGHT, got ") +
            to_string(rep.verdict));
    if (!(level_m > 5.0) || !std::isfinite(level_m))
        throw std::invalid_argument("verify_d_infty: level M must be finite and > 5");

    constexpr int kMaxK = 4;
    SimConfig cfg = base;
    cfg.x0 = 0.0;
    cfg.stop = StopRule::hit_level(level_m);
    cfg.watch_levels = {level_m / 2.0};
    cfg.regions.clear();
    for (int k = 0; k <= kMaxK; ++k) cfg.regions.push_back(Region::unit(k));
    cfg.record_stride = 0;
    cfg.snapshot_times.clear();
    cfg.validate();

    struct PathRes {
        double dk[kMaxK + 1] = {};
        bool failed = false;
        bool reentered = false;
    };
    auto res = parallel_paths<PathRes>(n_paths, jobs, [&](std::size_t i) {
        const PathSample s = simulate_path(p, cfg, stream_seed(master_seed, i));
        PathRes r;
        for (int k = 0; k <= kMaxK; ++k) r.dk[k] = s.drift_region[static_cast<std::size_t>(k)];
        r.failed = !s.stopped;
        // revisit of (0,1) after first passing M/2 marks an unsettled tail
        r.reentered = s.region_last_time[0] > hitting_time(s, level_m / 2.0);
        return r;
    });

    EnsembleSummary out;
    out.experiment = "d-infty";
    out.profile_id = p.id;
    out.estimator = "E[D_infty^0]";
    out.n_paths = n_paths;
    out.master_seed = master_seed;

    std::size_t reentered = 0;
    std::vector<double> dk[kMaxK + 1];
    for (int k = 0; k <= kMaxK; ++k) dk[k].reserve(n_paths);
    for (const auto& r : res) {
        for (int k = 0; k <= kMaxK; ++k) dk[k].push_back(r.dk[k]);
        if (r.failed) ++out.n_failed;
        if (r.reentered) ++reentered;
    }
    check_failed_cap(out.n_failed, n_paths, cap_failed_fraction, "d-infty");

    const MomentSummary m0 = summarize(dk[0]);
    out.estimate = m0.mean;
    out.std_error = m0.std_error;
    bool pass = std::abs(m0.mean - 1.0) <= 3.0 * m0.std_error + bias_allowance;
    out.detail = "M=" + fmt("%g", level_m) + "; reentered=" + std::to_string(reentered) +
                 "; failed=" + std::to_string(out.n_failed);
    for (int k = 1; k <= kMaxK; ++k) {
        const MomentSummary mk = summarize(dk[k]);
        const bool ok = mk.mean <= 1.0 + 3.0 * mk.std_error;
        pass = pass && ok;
        out.detail += "; E[D^" + std::to_string(k) + "]=" + fmt("%.4f", mk.mean) +
                      (ok ? "(<=1+3se)" : "(FAIL)");
    }
    out.pass = pass;
    return out;
}

EnsembleSummary verify_lln(const ExcitationProfile& p, const std::vector<double>& t_grid,
                           std::size_t n_paths, const SimConfig& base, std::uint64_t master_seed,
                           int jobs, double rel_band, double zero_band) {
    if (t_grid.empty()) throw std::invalid_argument("verify_lln: t_grid must be nonempty");
    const ClassificationReport rep = classify(p);
    if (rep.verdict == Verdict::INDETERMINATE || !std::isfinite(rep.speed))
        throw std::invalid_argument("verify_lln: profile classified INDETERMINATE, no speed");

    SimConfig cfg = base;
    cfg.stop = StopRule::horizon();
    cfg.t_max = t_grid.back();
    cfg.snapshot_times = t_grid;
    cfg.record_stride = 0;
    cfg.validate();

    auto res = parallel_paths<std::vector<double>>(n_paths, jobs, [&](std::size_t i) {
        return simulate_path(p, cfg, stream_seed(master_seed, i)).snapshot_x;
    });

    EnsembleSummary out;
    out.experiment = "verify-lln";
    out.profile_id = p.id;
    out.estimator = "mean X_t/t at t=" + fmt("%g", t_grid.back());
    out.n_paths = n_paths;
    out.master_seed = master_seed;

    std::vector<double> sd_over_t;
    for (std::size_t g = 0; g < t_grid.size(); ++g) {
        std::vector<double> ratio;
        ratio.reserve(n_paths);
        for (const auto& r : res) ratio.push_back(r[g] / t_grid[g]);
        const MomentSummary m = summarize(ratio);
        sd_over_t.push_back(m.std_dev);
        out.detail += (g ? "; " : "") + ("t=" + fmt("%g", t_grid[g])) +
                      ": mean=" + fmt("%.6g", m.mean) + " sd=" + fmt("%.4g", m.std_dev);
        if (g + 1 == t_grid.size()) {
            out.estimate = m.mean;
            out.std_error = m.std_error;
        }
    }

    const double v = rep.speed;
    bool mean_ok;
    if (v == 0.0) {
        // zero speed is asymptotic; at reachable horizons a transient
        // zero-speed profile still shows X_t ~ t^{mass/2}, so accept either a
        // mean already inside the band or a clear decay of |mean X_t/t|
        // across the grid (a ballistic profile holds its ratio flat near v)
        std::vector<double> abs_means;
        for (std::size_t g = 0; g < t_grid.size(); ++g) {
            std::vector<double> ratio;
            ratio.reserve(n_paths);
            for (const auto& r : res) ratio.push_back(r[g] / t_grid[g]);
            abs_means.push_back(std::abs(summarize(ratio).mean));
        }
        bool decaying = t_grid.size() >= 2;
        for (std::size_t g = 1; g < abs_means.size(); ++g)
            decaying = decaying && abs_means[g] < abs_means[g - 1];
        decaying = decaying && abs_means.back() <= 0.75 * abs_means.front() &&
                   abs_means.back() <= 0.6;
        mean_ok = std::abs(out.estimate) <= zero_band || decaying;
        if (decaying) out.detail += "; zero-speed decay gate met";
    } else {
        mean_ok = std::abs(out.estimate - v) <=
                  std::max(3.0 * out.std_error, rel_band * std::abs(v));
    }
    const bool disp_ok = t_grid.size() < 2 || sd_over_t.back() < sd_over_t.front();
    out.pass = mean_ok && disp_ok;
    out.detail += "; speed=" + fmt("%.6g", v) + (mean_ok ? "" : "; MEAN-OFF") +
                  (disp_ok ? "" : "; DISPERSION-NOT-SHRINKING");
    return out;
}

EnsembleSummary verify_clt(const ExcitationProfile& p, double t, std::size_t n_paths,
                           const SimConfig& base, std::uint64_t master_seed, int jobs,
                           double var_band, double ks_p_min, double mean_band) {
    if (n_paths < 2) throw std::invalid_argument("verify_clt: need at least 2 paths");
    const ClassificationReport rep = classify(p);
    if (rep.sigma_status != IntegralStatus::finite)
        throw std::invalid_argument(std::string("verify_clt: sigma is ") +
                                    to_string(rep.sigma_status) + " for " + p.id +
                                    "; the CLT needs a finite sigma");
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::invalid_argument("verify_clt: t must be positive and finite");

    SimConfig cfg = base;
    cfg.stop = StopRule::horizon();
    cfg.t_max = t;
    cfg.record_stride = 0;
    cfg.snapshot_times.clear();
    cfg.validate();

    struct PathRes {
        double x_t = 0.0;
        double x_sup = 0.0;
    };
    auto res = parallel_paths<PathRes>(n_paths, jobs, [&](std::size_t i) {
        const PathSample s = simulate_path(p, cfg, stream_seed(master_seed, i));
        return PathRes{s.x_final, s.x_max};
    });

    const double scale = rep.sigma * std::sqrt(t);
    std::vector<double> r, r_sup;
    r.reserve(n_paths);
    r_sup.reserve(n_paths);
    for (const auto& pr : res) {
        r.push_back((pr.x_t - rep.speed * t) / scale);
        r_sup.push_back((pr.x_sup - rep.speed * t) / scale);
    }

    const MomentSummary m = summarize(r);
    std::vector<double> centered;
    centered.reserve(n_paths);
    for (double v : r) centered.push_back(v - m.mean);

    const KsResult ks_raw = ks_test(r, [](double v) { return normal_cdf(v); });
    const KsResult ks_ctr = ks_test(centered, [](double v) { return normal_cdf(v); });
    const MomentSummary m_sup = summarize(r_sup);

    EnsembleSummary out;
    out.experiment = "verify-clt";
    out.profile_id = p.id;
    out.estimator = "var[(X_t - vt)/(sigma sqrt(t))]";
    out.n_paths = n_paths;
    out.master_seed = master_seed;
    out.estimate = m.variance;
    out.std_error = m.variance * std::sqrt(2.0 / static_cast<double>(n_paths - 1));
    out.statistic = ks_ctr.statistic;
    out.p_value = ks_ctr.p_value;

    const bool var_ok = std::abs(m.variance - 1.0) <= var_band;
    const bool ks_ok = ks_ctr.p_value >= ks_p_min;
    const bool mean_ok = std::abs(m.mean) <= mean_band;
    out.pass = var_ok && ks_ok && mean_ok;
    out.detail = "t=" + fmt("%g", t) + "; mean_resid=" + fmt("%.4f", m.mean) +
                 "; ks_centered_p=" + fmt("%.4g", ks_ctr.p_value) +
                 "; ks_raw_p=" + fmt("%.4g", ks_raw.p_value) +
                 "; sup_resid_mean=" + fmt("%.4f", m_sup.mean) +
                 "; sup_resid_var=" + fmt("%.4f", m_sup.variance) + (var_ok ? "" : "; VAR-OFF") +
                 (ks_ok ? "" : "; KS-REJECT") + (mean_ok ? "" : "; MEAN-OFF");
    return out;
}

}
