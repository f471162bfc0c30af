// Acceptance gate: one line per criterion, nonzero exit when any fails.
// An optional list of criterion numbers on the command line restricts the run.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ebm/criteria.hpp"
#include "ebm/ensemble.hpp"
#include "ebm/erw.hpp"
#include "ebm/experiment.hpp"
#include "ebm/profile.hpp"
#include "ebm/rayknight.hpp"
#include "ebm/rng.hpp"
#include "ebm/sde.hpp"
#include "ebm/stats.hpp"

#include "../oracles.hpp"
#include "../support.hpp"

using namespace ebm;

namespace {

namespace fs = std::filesystem;

std::string strf(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string info;
};

ExcitationProfile zero_profile() { return make_custom_table({0.0, 1.0}, {0.0, 0.0}); }

SimConfig base_cfg(double dt, double t_max) {
    SimConfig cfg;
    cfg.dt = dt;
    cfg.t_max = t_max;
    return cfg;
}

// ---- 1: verdict thresholds over the cookie mass grid ----------------------

Outcome criterion_verdicts() {
    Outcome out;
    out.pass = true;
    for (double mag : {0.5, 1.5, 2.5, 3.0, 4.5, 6.0}) {
        for (double sign : {1.0, -1.0}) {
            const double delta = sign * mag;
            const ClassificationReport rep = classify(make_single_cookie(delta));
            const Verdict want = mag <= 1.0 ? Verdict::RECURRENT
                                 : sign > 0 ? Verdict::TRANSIENT_RIGHT
                                            : Verdict::TRANSIENT_LEFT;
            const bool want_moving = mag > 2.0;
            const bool want_sigma = mag > 4.0;

            bool ok = rep.verdict == want;
            ok = ok && (want_moving ? rep.speed * sign > 0.0 : rep.speed == 0.0);
            ok = ok && ((rep.sigma_status == IntegralStatus::finite) == want_sigma);
            if (!ok) {
                out.pass = false;
                out.info += strf("delta=%+.1f -> %s speed=%.6g sigma=%s; ", delta,
                                 to_string(rep.verdict), rep.speed, to_string(rep.sigma_status));
            }
        }
    }
    if (out.pass)
        out.info = "12 profiles: recurrent |d|<=1, zero-speed to 2, ballistic beyond, "
                   "sigma finite only at |d| in {4.5, 6}";
    return out;
}

// ---- 2: quadrature against the cookie closed forms -------------------------

Outcome criterion_closed_forms() {
    const double e3 = std::exp(-3.0);
    const double c1 = (1.0 - e3) / 3.0 + e3 / 2.0;
    const double c2 = (1.0 - 4.0 * e3) / 9.0 + e3;
    const double v = c1 / c2;

    const ClassificationReport rep = classify(make_single_cookie(3.0));
    const double g1 = rep.c1_plus.value;
    const double g2 = rep.c2_plus.value;
    const double recip = rep.speed * rep.pi_mean.value_or(0.0);

    Outcome out;
    const double r1 = std::fabs(g1 - c1) / c1;
    const double r2 = std::fabs(g2 - c2) / c2;
    const double rv = std::fabs(rep.speed - v) / v;
    const double rr = std::fabs(recip - 1.0);
    out.pass = r1 <= 1e-8 && r2 <= 1e-8 && rv <= 1e-8 && rr <= 1e-8;
    out.info = strf("C1+=%.12g (rel %.1e), C2+=%.12g (rel %.1e), speed=%.12g (rel %.1e), "
                    "speed*pi_mean-1=%.1e",
                    g1, r1, g2, r2, rep.speed, rv, rr);
    return out;
}

// ---- 3: critical logarithmic profiles need the declared tail --------------

Outcome criterion_log_critical() {
    const auto lc_half = make_log_critical(0.5);
    const auto lc_two = make_log_critical(2.0);

    const Verdict d1 = classify(lc_half).verdict;
    const Verdict d2 = classify(lc_two).verdict;

    CriterionOptions numeric;
    numeric.tail_mode = TailMode::numeric;
    const Verdict n1 = classify(lc_half, numeric).verdict;
    const Verdict n2 = classify(lc_two, numeric).verdict;

    Outcome out;
    out.pass = d1 == Verdict::RECURRENT && d2 == Verdict::TRANSIENT_RIGHT &&
               n1 == Verdict::INDETERMINATE && n2 == Verdict::INDETERMINATE;
    out.info = strf("declared: alpha=0.5 -> %s, alpha=2 -> %s; numeric: %s, %s", to_string(d1),
                    to_string(d2), to_string(n1), to_string(n2));
    return out;
}

// ---- 4: martingale drift identity E[D_{T_a}] = a ---------------------------

Outcome criterion_drift_identity() {
    Outcome out;
    out.pass = true;
    struct Setup {
        double delta, t_max;
    };
    for (const Setup& su : {Setup{3.0, 200.0}, Setup{1.0, 4000.0}}) {
        const auto p = make_single_cookie(su.delta);
        for (double a : {2.0, 5.0}) {
            const EnsembleSummary s =
                verify_drift_identity(p, a, 5000, base_cfg(1e-4, su.t_max), 0, 0);
            out.pass = out.pass && s.pass;
            out.info += strf("%sd=%g a=%g: %.4f+-%.4f", out.info.empty() ? "" : "; ", su.delta, a,
                             s.estimate, s.std_error);
            if (!s.pass) out.info += " FAIL";
        }
    }
    return out;
}

// ---- 5: settled drift per unit interval ------------------------------------

Outcome criterion_d_infty() {
    const EnsembleSummary s =
        verify_d_infty(make_single_cookie(3.0), 30.0, 5000, base_cfg(1e-4, 500.0), 0, 0);
    Outcome out;
    out.pass = s.pass;
    out.info = strf("E[D^0]=%.4f+-%.4f; %s", s.estimate, s.std_error, s.detail.c_str());
    return out;
}

// ---- 6: law of large numbers against the quadrature speed ------------------

Outcome criterion_lln() {
    const std::vector<double> t_grid{25.0, 50.0, 100.0, 200.0};
    const EnsembleSummary fast =
        verify_lln(make_single_cookie(3.0), t_grid, 2000, base_cfg(1e-4, 200.0), 0, 0);
    const EnsembleSummary slow =
        verify_lln(make_single_cookie(1.5), t_grid, 2000, base_cfg(1e-4, 200.0), 0, 0);
    Outcome out;
    out.pass = fast.pass && slow.pass;
    out.info = strf("d=3: mean X_t/t=%.5f+-%.5f vs v=2.46184%s; d=1.5 zero-speed: %.4f -> decay%s",
                    fast.estimate, fast.std_error, fast.pass ? "" : " FAIL", slow.estimate,
                    slow.pass ? " ok" : " FAIL");
    return out;
}

// ---- 7: Ray-Knight duality of the local-time profile ------------------------

Outcome criterion_rayknight() {
    const auto p = make_single_cookie(3.0);
    const std::size_t n = 2000;
    const double a = 20.0;
    const double bin = 0.1;

    SimConfig cfg = base_cfg(1e-4, 200.0);
    cfg.bin_width = bin;
    cfg.stop = StopRule::hit_level(a);

    struct Lhat {
        double at19 = 0.0, at18 = 0.0;
        bool ok = false;
    };
    const auto prim = parallel_paths<Lhat>(n, 0, [&](std::size_t i) {
        const PathSample s = simulate_path(p, cfg, stream_seed(0, i));
        Lhat r;
        r.ok = s.stopped;
        r.at19 = s.local_time.occupation(s.local_time.bin_index(19.0)) / bin;
        r.at18 = s.local_time.occupation(s.local_time.bin_index(18.0)) / bin;
        return r;
    });

    std::vector<double> sde19, sde18;
    std::size_t failed = 0;
    for (const Lhat& r : prim) {
        if (!r.ok) {
            ++failed;
            continue;
        }
        sde19.push_back(r.at19);
        sde18.push_back(r.at18);
    }

    // the dual diffusion window-averaged the way the box kernel bins the primal
    const double dx = 1e-3;
    auto window_mean = [dx](const ZPath& zp, double x0) {
        const auto lo = static_cast<std::size_t>(std::llround((x0 - 0.05) / dx));
        const auto hi = static_cast<std::size_t>(std::llround((x0 + 0.05) / dx));
        double sum = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) sum += zp.z[k];
        return sum / static_cast<double>(hi - lo + 1);
    };
    std::vector<double> dual19, dual18;
    dual19.reserve(n);
    dual18.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const ZPath zp = simulate_z(p, 2.05, dx, stream_seed(1, i));
        dual19.push_back(window_mean(zp, 1.0));
        dual18.push_back(window_mean(zp, 2.0));
    }

    const double d19 = ks_test_two_sample(sde19, dual19).statistic;
    const double d18 = ks_test_two_sample(sde18, dual18).statistic;
    const double n_eff = static_cast<double>(sde19.size()) * static_cast<double>(n) /
                         static_cast<double>(sde19.size() + n);
    const double crit = ks_critical_value(0.05, n_eff);

    // dimension-two squared Bessel mean oracle for the zero profile
    const auto zero = zero_profile();
    bool besq_ok = true;
    std::string besq;
    for (double x : {1.0, 5.0}) {
        const auto zs = terminal_samples(zero, x, n, dx, 2);
        const MomentSummary m = summarize(zs);
        const bool ok = std::fabs(m.mean - 2.0 * x) <= 3.0 * m.std_error;
        besq_ok = besq_ok && ok;
        besq += strf(" E[Z_%g]=%.3f+-%.3f%s", x, m.mean, m.std_error, ok ? "" : " FAIL");
    }

    Outcome out;
    out.pass = d19 < crit && d18 < crit && besq_ok && failed == 0;
    out.info = strf("KS(L_T at a-1, Z_1)=%.4f, KS(a-2, Z_2)=%.4f vs crit=%.4f; censored=%zu;%s",
                    d19, d18, crit, failed, besq.c_str());
    return out;
}

// ---- 8: invariant law of the environment seen from the walker ---------------

Outcome criterion_invariant() {
    const auto p = make_single_cookie(3.0);
    const auto samples = terminal_samples(p, 50.0, 5000, 1e-3, 0);
    const InvariantComparison ic = compare_invariant(samples, p);

    Outcome out;
    const double rel = std::fabs(ic.sample_mean - ic.pi_mean) / ic.pi_mean;
    out.pass = ic.ks_statistic < 0.05 && rel <= 0.05;
    out.info = strf("KS=%.4f (<0.05), mean=%.5f vs pi_mean=%.5f (rel %.3f)", ic.ks_statistic,
                    ic.sample_mean, ic.pi_mean, rel);
    return out;
}

// ---- 9: central limit theorem at the quadrature sigma -----------------------

Outcome criterion_clt() {
    const auto p = make_single_cookie(6.0);
    const EnsembleSummary s = verify_clt(p, 400.0, 2000, base_cfg(1e-4, 400.0), 0, 0);

    const ebm_test::CookieSigmaOracle oracle(6.0);
    const double sigma = classify(p).sigma;
    const double rel = std::fabs(sigma - oracle.sigma()) / oracle.sigma();

    Outcome out;
    out.pass = s.pass && rel <= 1e-3;
    out.info = strf("var=%.4f, ks_p=%.3f, sigma=%.8f vs oracle=%.8f (rel %.1e); %s", s.estimate,
                    s.p_value, sigma, oracle.sigma(), rel, s.detail.c_str());
    return out;
}

// ---- 10: occupation identity residual shrinks with the step -----------------

Outcome criterion_occupation() {
    // The smooth profile carries the monotone gate. The cookie indicator
    // drift makes the per-bin residual proportional to the fractional part
    // of bin_width/dt, which degenerates to rounding noise at dt = 1e-4
    // where the ratio is exactly 1000; its numbers are reported alongside.
    const auto study = [](const ExcitationProfile& p) {
        const std::size_t reps = 20;
        std::vector<double> rels;
        for (double dt : {1e-3, 1e-4, 1e-5}) {
            const auto vals = parallel_paths<double>(reps, 0, [&](std::size_t i) {
                const PathSample s = simulate_path(p, base_cfg(dt, 10.0), stream_seed(3, i));
                return occupation_identity_residual(s, p) / std::fabs(s.drift_total);
            });
            double mean = 0.0;
            for (double v : vals) mean += v;
            rels.push_back(mean / static_cast<double>(reps));
        }
        return rels;
    };
    const std::vector<double> smooth = study(make_exp_decay(3.0, 1.0));
    const std::vector<double> cookie = study(make_single_cookie(3.0));

    Outcome out;
    out.pass = smooth[1] < smooth[0] && smooth[2] < smooth[1] && smooth[2] <= 0.05 &&
               cookie[2] <= 0.05;
    out.info = strf("exp_decay(3,1): %.2e -> %.2e -> %.2e over dt {1e-3,1e-4,1e-5}; "
                    "single_cookie(3): %.2e -> %.2e -> %.2e (middle point is the exact "
                    "bin_width/dt resonance)",
                    smooth[0], smooth[1], smooth[2], cookie[0], cookie[1], cookie[2]);
    return out;
}

// ---- 11: CLI output is byte-identical for any worker count ------------------

Outcome criterion_cli_determinism() {
    Outcome out;
    const char* cli = std::getenv("EBM_CLI_PATH");
    if (cli == nullptr || !fs::exists(cli)) {
        out.info = "EBM_CLI_PATH is not set or missing; run through ctest or export it";
        return out;
    }

    ebm_test::TempDir td("cli_determinism");
    const std::string common =
        std::string(cli) +
        " simulate --profile-kind single_cookie --delta 3 --seed 9"
        " --dt 0.001 --t-max 2 --record-stride 250 --n-paths 64 --dump-paths 3";
    const std::string run1 = common + " --jobs 1 --out " + td.file("a") + " > /dev/null 2>&1";
    const std::string run4 = common + " --jobs 4 --out " + td.file("b") + " > /dev/null 2>&1";
    if (std::system(run1.c_str()) != 0 || std::system(run4.c_str()) != 0) {
        out.info = "CLI run failed";
        return out;
    }

    std::size_t compared = 0;
    for (const auto& e : fs::directory_iterator(td.file("a"))) {
        const std::string name = e.path().filename().string();
        if (!fs::exists(fs::path(td.file("b")) / name)) {
            out.info = "missing in second run: " + name;
            return out;
        }
        if (name == "run_log.txt") continue;
        if (ebm_test::slurp(e.path().string()) !=
            ebm_test::slurp((fs::path(td.file("b")) / name).string())) {
            out.info = "differs across jobs: " + name;
            return out;
        }
        ++compared;
    }
    // paths.csv, 3 path traces, 3 local-time profiles, manifest.json
    out.pass = compared >= 8;
    out.info = strf("%zu files byte-identical between --jobs 1 and --jobs 4", compared);
    if (!out.pass) out.info += " (expected at least 8)";
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all = {
        {1, "cookie verdict thresholds", criterion_verdicts},
        {2, "closed-form criterion integrals", criterion_closed_forms},
        {3, "critical log profile tails", criterion_log_critical},
        {4, "drift identity E[D_{T_a}] = a", criterion_drift_identity},
        {5, "settled drift E[D_infty^k]", criterion_d_infty},
        {6, "law of large numbers", criterion_lln},
        {7, "Ray-Knight duality", criterion_rayknight},
        {8, "invariant environment law", criterion_invariant},
        {9, "central limit scaling", criterion_clt},
        {10, "occupation identity residual", criterion_occupation},
        {11, "CLI determinism across jobs", criterion_cli_determinism},
    };

    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (const Criterion& c : all) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end())
            continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.info = strf("exception: %s", e.what());
        }
        std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.info.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
