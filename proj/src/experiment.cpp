#include "ebm/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include "ebm/criteria.hpp"
#include "ebm/ensemble.hpp"
#include "ebm/erw.hpp"
#include "ebm/rayknight.hpp"
#include "ebm/rng.hpp"
#include "ebm/sde.hpp"
#include "ebm/stats.hpp"
#include "ebm/version.hpp"

namespace ebm {

namespace {

namespace fs = std::filesystem;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[noreturn]] void bad_config(const std::string& msg) { throw std::invalid_argument(msg); }

// ---- config schema -------------------------------------------------------

const std::vector<std::string> kSubcommands = {
    "classify", "sweep",      "simulate",       "rayknight", "verify-lln",
    "verify-clt", "drift-identity", "d-infty", "erw",
};

ordered_json section_defaults(const std::string& sub) {
    ordered_json d = ordered_json::object();
    if (sub == "classify") {
        d["x_max"] = 1e6;
        d["tol"] = 1e-9;
        d["band"] = 0.05;
        d["drift_tol"] = 0.005;
        d["tail_mode"] = "declared";
    } else if (sub == "sweep") {
        d["delta_min"] = -6.0;
        d["delta_max"] = 6.0;
        d["delta_step"] = 0.5;
        d["x_max"] = 1e6;
        d["tol"] = 1e-9;
        d["band"] = 0.05;
        d["drift_tol"] = 0.005;
        d["tail_mode"] = "declared";
    } else if (sub == "simulate") {
        d["dt"] = 1e-4;
        d["t_max"] = 100.0;
        d["bin_width"] = 0.0;  // 0 = 10*sqrt(dt)
        d["x0"] = 0.0;
        d["record_stride"] = 1000;
        d["n_paths"] = 1;
        d["dump_paths"] = 1;
        d["stop_level"] = nullptr;
        d["stop_lower"] = nullptr;
        d["stop_upper"] = nullptr;
    } else if (sub == "rayknight") {
        d["a"] = 50.0;
        d["dx"] = 1e-3;
        d["n_paths"] = 5000;
        d["dump_paths"] = 1;
        d["compare_invariant"] = false;
    } else if (sub == "verify-lln") {
        d["t_grid"] = ordered_json::array({25.0, 50.0, 100.0, 200.0});
        d["n_paths"] = 2000;
        d["dt"] = 1e-4;
        d["bin_width"] = 0.0;
        d["rel_band"] = 0.05;
        d["zero_band"] = 0.05;
    } else if (sub == "verify-clt") {
        d["t"] = 400.0;
        d["n_paths"] = 2000;
        d["dt"] = 1e-4;
        d["bin_width"] = 0.0;
        d["var_band"] = 0.2;
        d["ks_p_min"] = 0.01;
        d["mean_band"] = 0.5;
    } else if (sub == "drift-identity") {
        d["a"] = ordered_json::array({2.0, 5.0});
        d["n_paths"] = 5000;
        d["dt"] = 1e-4;
        d["t_max"] = 200.0;
        d["bin_width"] = 0.0;
        d["cap_failed"] = 0.01;
    } else if (sub == "d-infty") {
        d["level_m"] = 30.0;
        d["n_paths"] = 5000;
        d["dt"] = 1e-4;
        d["t_max"] = 500.0;
        d["bin_width"] = 0.0;
        d["bias_allowance"] = 0.05;
        d["cap_failed"] = 0.01;
    } else if (sub == "erw") {
        d["p"] = ordered_json::array({0.75, 0.75, 0.75});
        d["n_steps"] = 100000;
        d["n_paths"] = 400;
        d["trace_stride"] = 0;
    } else {
        bad_config("unknown subcommand '" + sub + "'");
    }
    return d;
}

bool needs_profile(const std::string& sub) { return sub != "sweep" && sub != "erw"; }

bool type_matches(const ordered_json& def, const ordered_json& val) {
    if (def.is_null()) return val.is_null() || val.is_number();
    if (def.is_number_integer()) return val.is_number_integer();
    if (def.is_number()) return val.is_number();
    if (def.is_boolean()) return val.is_boolean();
    if (def.is_string()) return val.is_string();
    if (def.is_array()) {
        if (!val.is_array()) return val.is_number();  // scalars promote to one-element lists
        for (const auto& e : val)
            if (!e.is_number()) return false;
        return true;
    }
    return false;
}

ordered_json resolve_section(const std::string& sub, const ordered_json& user) {
    ordered_json out = section_defaults(sub);
    if (user.is_null()) return out;
    if (!user.is_object()) bad_config("section '" + sub + "' must be a JSON object");
    for (const auto& [key, val] : user.items()) {
        if (!out.contains(key)) bad_config("unknown key '" + key + "' in section '" + sub + "'");
        if (!type_matches(out[key], val))
            bad_config("key '" + key + "' in section '" + sub + "' has the wrong type");
        if (out[key].is_array() && val.is_number())
            out[key] = ordered_json::array({val});
        else
            out[key] = val;
    }
    return out;
}

// ---- profile parsing -----------------------------------------------------

std::vector<double> num_array(const ordered_json& v, const std::string& what) {
    if (!v.is_array()) bad_config(what + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) bad_config(what + " must be an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

double num_field(const ordered_json& spec, const char* key) {
    if (!spec.contains(key) || !spec[key].is_number())
        bad_config(std::string("profile: kind '") + spec["kind"].get<std::string>() +
                   "' needs numeric field '" + key + "'");
    return spec[key].get<double>();
}

ExcitationProfile parse_profile(const ordered_json& spec);

void check_profile_keys(const ordered_json& spec, std::initializer_list<const char*> allowed) {
    for (const auto& [key, val] : spec.items()) {
        (void)val;
        if (key == "kind" || key == "reflected") continue;
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) bad_config("profile: unknown key '" + key + "' for kind '" +
                            spec["kind"].get<std::string>() + "'");
    }
}

ExcitationProfile parse_profile(const ordered_json& spec) {
    if (!spec.is_object() || !spec.contains("kind") || !spec["kind"].is_string())
        bad_config("profile must be an object with a string 'kind'");
    const std::string kind = spec["kind"].get<std::string>();

    ExcitationProfile p;
    if (kind == "single_cookie") {
        check_profile_keys(spec, {"delta"});
        p = make_single_cookie(num_field(spec, "delta"));
    } else if (kind == "piecewise_cookies") {
        check_profile_keys(spec, {"boundaries", "heights"});
        if (!spec.contains("boundaries") || !spec.contains("heights"))
            bad_config("profile: piecewise_cookies needs 'boundaries' and 'heights'");
        p = make_piecewise_cookies(num_array(spec["boundaries"], "profile.boundaries"),
                                   num_array(spec["heights"], "profile.heights"));
    } else if (kind == "exp_decay") {
        check_profile_keys(spec, {"delta", "rate"});
        p = make_exp_decay(num_field(spec, "delta"), num_field(spec, "rate"));
    } else if (kind == "log_critical") {
        check_profile_keys(spec, {"alpha"});
        p = make_log_critical(num_field(spec, "alpha"));
    } else if (kind == "custom_table") {
        check_profile_keys(spec, {"path"});
        if (!spec.contains("path") || !spec["path"].is_string())
            bad_config("profile: custom_table needs a string 'path'");
        p = load_table_csv(spec["path"].get<std::string>());
    } else if (kind == "truncated") {
        check_profile_keys(spec, {"level", "inner"});
        if (!spec.contains("inner")) bad_config("profile: truncated needs 'inner'");
        p = make_truncated(parse_profile(spec["inner"]), num_field(spec, "level"));
    } else if (kind == "space_damped") {
        check_profile_keys(spec, {"scale", "inner"});
        if (!spec.contains("inner")) bad_config("profile: space_damped needs 'inner'");
        p = make_space_damped(parse_profile(spec["inner"]), num_field(spec, "scale"));
    } else {
        bad_config("profile: unknown kind '" + kind + "'");
    }

    if (spec.contains("reflected")) {
        if (!spec["reflected"].is_boolean()) bad_config("profile: 'reflected' must be a boolean");
        if (spec["reflected"].get<bool>()) p = reflected(std::move(p));
    }
    return p;
}

// ---- output plumbing -----------------------------------------------------

struct Ctx {
    fs::path dir;
    std::vector<std::string> outputs;

    void write(const std::string& name, const std::string& content, bool track = true) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + (dir / name).string() + " for writing");
        f << content;
        f.close();
        if (!f) throw std::runtime_error("failed writing " + (dir / name).string());
        if (track) outputs.push_back(name);
    }
};

CriterionOptions criterion_options(const ordered_json& sec) {
    CriterionOptions opt;
    opt.x_max = sec["x_max"].get<double>();
    opt.rel_tol = sec["tol"].get<double>();
    opt.band = sec["band"].get<double>();
    opt.drift_tol = sec["drift_tol"].get<double>();
    const std::string mode = sec["tail_mode"].get<std::string>();
    if (mode == "declared")
        opt.tail_mode = TailMode::declared;
    else if (mode == "numeric")
        opt.tail_mode = TailMode::numeric;
    else
        bad_config("tail_mode must be 'declared' or 'numeric', got '" + mode + "'");
    return opt;
}

SimConfig sim_base(const ordered_json& sec) {
    SimConfig cfg;
    cfg.dt = sec["dt"].get<double>();
    cfg.bin_width = sec["bin_width"].get<double>();
    return cfg;
}

std::size_t path_count(const ordered_json& sec, const char* key = "n_paths") {
    const auto n = sec[key].get<std::int64_t>();
    if (n <= 0) bad_config(std::string(key) + " must be positive");
    return static_cast<std::size_t>(n);
}

ordered_json summary_to_json(const EnsembleSummary& s) {
    ordered_json j;
    j["experiment"] = s.experiment;
    j["profile_id"] = s.profile_id;
    j["estimator"] = s.estimator;
    j["n_paths"] = s.n_paths;
    j["n_failed"] = s.n_failed;
    j["estimate"] = s.estimate;
    j["std_error"] = s.std_error;
    j["statistic"] = s.statistic;
    j["p_value"] = s.p_value;
    j["pass"] = s.pass;
    j["detail"] = s.detail;
    return j;
}

std::string seed_banner(std::uint64_t seed) {
    return "# master_seed=" + std::to_string(seed) + "\n";
}

void write_summary(Ctx& ctx, std::uint64_t seed, const std::vector<EnsembleSummary>& rows,
                   ordered_json& results) {
    std::string csv = summary_csv_header() + "\n";
    for (const EnsembleSummary& s : rows) {
        csv += summary_csv_row(s) + "\n";
        results.push_back(summary_to_json(s));
    }
    (void)seed;
    ctx.write("summary.csv", csv);
}

// ---- runners: one per subcommand, return the gate verdict -----------------

bool run_classify(const ordered_json& cfg, Ctx& ctx, ordered_json& results, int) {
    const ExcitationProfile p = parse_profile(cfg["profile"]);
    const ClassificationReport rep = classify(p, criterion_options(cfg["classify"]));
    ctx.write("report.csv", report_csv_header() + "\n" + report_csv_row(rep) + "\n");
    ctx.write("report.json", report_json(rep) + "\n");
    ordered_json r;
    r["verdict"] = to_string(rep.verdict);
    r["speed"] = rep.speed;
    r["sigma"] = rep.sigma;
    results.push_back(r);
    return true;
}

bool run_sweep(const ordered_json& cfg, Ctx& ctx, ordered_json& results, int) {
    const ordered_json& sec = cfg["sweep"];
    const double lo = sec["delta_min"].get<double>();
    const double hi = sec["delta_max"].get<double>();
    const double step = sec["delta_step"].get<double>();
    if (!(step > 0.0)) bad_config("sweep: delta_step must be positive");
    if (!(hi >= lo)) bad_config("sweep: delta_max must be >= delta_min");

    CriterionOptions opt = criterion_options(sec);
    const auto n = static_cast<std::int64_t>(std::floor((hi - lo) / step + 1e-9));
    std::string csv = report_csv_header() + "\n";
    for (std::int64_t i = 0; i <= n; ++i) {
        const double delta = lo + static_cast<double>(i) * step;
        const ClassificationReport rep = classify(make_single_cookie(delta), opt);
        csv += report_csv_row(rep) + "\n";
        ordered_json r;
        r["delta"] = delta;
        r["verdict"] = to_string(rep.verdict);
        r["speed"] = rep.speed;
        results.push_back(r);
    }
    ctx.write("sweep.csv", csv);
    return true;
}

bool run_simulate(const ordered_json& cfg, Ctx& ctx, ordered_json& results, int jobs) {
    const ExcitationProfile p = parse_profile(cfg["profile"]);
    const ordered_json& sec = cfg["simulate"];
    const std::uint64_t seed = cfg["seed"].get<std::uint64_t>();

    SimConfig base = sim_base(sec);
    base.t_max = sec["t_max"].get<double>();
    base.x0 = sec["x0"].get<double>();
    base.record_stride = sec["record_stride"].get<std::int64_t>();
    const bool has_level = !sec["stop_level"].is_null();
    const bool has_pair = !sec["stop_lower"].is_null() || !sec["stop_upper"].is_null();
    if (has_level && has_pair) bad_config("simulate: stop_level excludes stop_lower/stop_upper");
    if (has_level) {
        base.stop = StopRule::hit_level(sec["stop_level"].get<double>());
    } else if (has_pair) {
        if (sec["stop_lower"].is_null() || sec["stop_upper"].is_null())
            bad_config("simulate: stop_lower and stop_upper come together");
        base.stop = StopRule::hit_either(sec["stop_lower"].get<double>(),
                                         sec["stop_upper"].get<double>());
    }
    base.validate();

    const std::size_t n_paths = path_count(sec);
    const auto dump = static_cast<std::size_t>(
        std::max<std::int64_t>(0, sec["dump_paths"].get<std::int64_t>()));

    struct Row {
        std::uint64_t seed;
        double t_final, x_final, x_min, x_max, drift_total;
        bool stopped;
    };
    struct Res {
        Row row;
        PathSample full;  // populated only for dumped paths
        bool has_full = false;
    };
    auto res = parallel_paths<Res>(n_paths, jobs, [&](std::size_t i) {
        PathSample s = simulate_path(p, base, stream_seed(seed, i));
        Res r;
        r.row = Row{s.seed,  s.t_final,     s.x_final, s.x_min,
                    s.x_max, s.drift_total, s.stopped};
        if (i < dump) {
            r.full = std::move(s);
            r.has_full = true;
        }
        return r;
    });

    std::string csv = seed_banner(seed);
    csv += "path,seed,t_final,x_final,x_min,x_max,stopped,drift_total\n";
    for (std::size_t i = 0; i < res.size(); ++i) {
        const Row& r = res[i].row;
        csv += std::to_string(i) + "," + std::to_string(r.seed) + "," + fmt17(r.t_final) + "," +
               fmt17(r.x_final) + "," + fmt17(r.x_min) + "," + fmt17(r.x_max) + "," +
               (r.stopped ? "1" : "0") + "," + fmt17(r.drift_total) + "\n";
    }
    ctx.write("paths.csv", csv);

    for (std::size_t i = 0; i < res.size() && i < dump; ++i) {
        const PathSample& s = res[i].full;
        if (!res[i].has_full) continue;
        if (base.record_stride > 0) {
            std::string trace = seed_banner(seed) + "t,x\n";
            for (std::size_t k = 0; k < s.record_t.size(); ++k)
                trace += fmt17(s.record_t[k]) + "," + fmt17(s.record_x[k]) + "\n";
            ctx.write("path_" + std::to_string(i) + ".csv", trace);
        }
        std::string lt = seed_banner(seed) + "bin_center,occupation_density\n";
        const LocalTimeField& f = s.local_time;
        for (std::int64_t b = f.lo_bin(); !f.empty() && b <= f.hi_bin(); ++b) {
            const double occ = f.occupation(b);
            if (occ == 0.0) continue;
            lt += fmt17(f.bin_center(b)) + "," + fmt17(occ / f.bin_width()) + "\n";
        }
        ctx.write("local_time_" + std::to_string(i) + ".csv", lt);
    }

    ordered_json r;
    r["n_paths"] = n_paths;
    r["stopped"] = [&] {
        std::size_t c = 0;
        for (const auto& e : res) c += e.row.stopped ? 1 : 0;
        return c;
    }();
    results.push_back(r);
    return true;
}

bool run_rayknight(const ordered_json& cfg, Ctx& ctx, ordered_json& results, int) {
    const ExcitationProfile p = parse_profile(cfg["profile"]);
    const ordered_json& sec = cfg["rayknight"];
    const std::uint64_t seed = cfg["seed"].get<std::uint64_t>();
    const double a = sec["a"].get<double>();
    const double dx = sec["dx"].get<double>();
    const std::size_t n_paths = path_count(sec);
    const auto dump = static_cast<std::size_t>(
        std::max<std::int64_t>(0, sec["dump_paths"].get<std::int64_t>()));

    const std::vector<double> samples = terminal_samples(p, a, n_paths, dx, seed);
    std::string term = seed_banner(seed) + "z\n";
    for (double z : samples) term += fmt17(z) + "\n";
    ctx.write("terminal.csv", term);

    for (std::size_t i = 0; i < dump && i < n_paths; ++i) {
        const ZPath zp = simulate_z(p, a, dx, stream_seed(seed, i));
        std::string csv = seed_banner(seed) + "x,z\n";
        for (std::size_t k = 0; k < zp.z.size(); ++k)
            csv += fmt17(static_cast<double>(k) * dx) + "," + fmt17(zp.z[k]) + "\n";
        ctx.write("zpath_" + std::to_string(i) + ".csv", csv);
    }

    const MomentSummary m = summarize(samples);
    ordered_json r;
    r["mean_terminal"] = m.mean;
    r["se_terminal"] = m.std_error;
    if (sec["compare_invariant"].get<bool>()) {
        const InvariantComparison ic = compare_invariant(samples, p);
        EnsembleSummary s;
        s.experiment = "rayknight-invariant";
        s.profile_id = p.id;
        s.estimator = "mean Z_a vs pi_mean";
        s.n_paths = n_paths;
        s.estimate = ic.sample_mean;
        s.std_error = m.std_error;
        s.statistic = ic.ks_statistic;
        s.p_value = ic.ks_p_value;
        s.master_seed = seed;
        s.pass = true;  // report-only: gates live in the verifiers and tests
        s.detail = "a=" + fmt17(a) + "; pi_mean=" + fmt17(ic.pi_mean);
        std::vector<EnsembleSummary> rows{s};
        write_summary(ctx, seed, rows, results);
    }
    results.push_back(r);
    return true;
}

bool run_verify_lln(const ordered_json& cfg, Ctx& ctx, ordered_json& results, int jobs) {
    const ExcitationProfile p = parse_profile(cfg["profile"]);
    const ordered_json& sec = cfg["verify-lln"];
    const std::uint64_t seed = cfg["seed"].get<std::uint64_t>();
    const EnsembleSummary s =
        verify_lln(p, num_array(sec["t_grid"], "verify-lln.t_grid"), path_count(sec),
                   sim_base(sec), seed, jobs, sec["rel_band"].get<double>(),
                   sec["zero_band"].get<double>());
    std::vector<EnsembleSummary> rows{s};
    write_summary(ctx, seed, rows, results);
    return s.pass;
}

bool run_verify_clt(const ordered_json& cfg, Ctx& ctx, ordered_json& results, int jobs) {
    const ExcitationProfile p = parse_profile(cfg["profile"]);
    const ordered_json& sec = cfg["verify-clt"];
    const std::uint64_t seed = cfg["seed"].get<std::uint64_t>();
    const EnsembleSummary s =
        verify_clt(p, sec["t"].get<double>(), path_count(sec), sim_base(sec), seed, jobs,
                   sec["var_band"].get<double>(), sec["ks_p_min"].get<double>(),
                   sec["mean_band"].get<double>());
    std::vector<EnsembleSummary> rows{s};
    write_summary(ctx, seed, rows, results);
    return s.pass;
}

bool run_drift_identity(const ordered_json& cfg, Ctx& ctx, ordered_json& results, int jobs) {
    const ExcitationProfile p = parse_profile(cfg["profile"]);
    const ordered_json& sec = cfg["drift-identity"];
    const std::uint64_t seed = cfg["seed"].get<std::uint64_t>();
    SimConfig base = sim_base(sec);
    base.t_max = sec["t_max"].get<double>();

    std::vector<EnsembleSummary> rows;
    bool pass = true;
    for (double a : num_array(sec["a"], "drift-identity.a")) {
        rows.push_back(verify_drift_identity(p, a, path_count(sec), base, seed, jobs,
                                             sec["cap_failed"].get<double>()));
        pass = pass && rows.back().pass;
    }
    write_summary(ctx, seed, rows, results);
    return pass;
}

bool run_d_infty(const ordered_json& cfg, Ctx& ctx, ordered_json& results, int jobs) {
    const ExcitationProfile p = parse_profile(cfg["profile"]);
    const ordered_json& sec = cfg["d-infty"];
    const std::uint64_t seed = cfg["seed"].get<std::uint64_t>();
    SimConfig base = sim_base(sec);
    base.t_max = sec["t_max"].get<double>();
    const EnsembleSummary s =
        verify_d_infty(p, sec["level_m"].get<double>(), path_count(sec), base, seed, jobs,
                       sec["bias_allowance"].get<double>(), sec["cap_failed"].get<double>());
    std::vector<EnsembleSummary> rows{s};
    write_summary(ctx, seed, rows, results);
    return s.pass;
}

bool run_erw(const ordered_json& cfg, Ctx& ctx, ordered_json& results, int jobs) {
    const ordered_json& sec = cfg["erw"];
    const std::uint64_t seed = cfg["seed"].get<std::uint64_t>();
    CookieEnvironment env{num_array(sec["p"], "erw.p")};
    const std::int64_t n_steps = sec["n_steps"].get<std::int64_t>();
    const std::int64_t stride = sec["trace_stride"].get<std::int64_t>();

    const EnsembleSummary s = erw_ensemble(env, n_steps, path_count(sec), seed, jobs);
    std::vector<EnsembleSummary> rows{s};
    write_summary(ctx, seed, rows, results);

    if (stride > 0) {
        const WalkSample w = simulate_walk(env, n_steps, stream_seed(seed, 0), stride);
        std::string csv = seed_banner(seed) + "step,x\n";
        for (std::size_t i = 0; i < w.trace_x.size(); ++i) {
            const std::int64_t step =
                std::min<std::int64_t>(static_cast<std::int64_t>(i) * stride, n_steps);
            csv += std::to_string(step) + "," + std::to_string(w.trace_x[i]) + "\n";
        }
        ctx.write("trace_0.csv", csv);
    }
    return s.pass;
}

std::string iso_utc(std::chrono::system_clock::time_point tp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

const std::vector<std::string>& subcommand_names() { return kSubcommands; }

ordered_json subcommand_defaults(const std::string& subcommand) {
    return section_defaults(subcommand);
}

ExcitationProfile profile_from_json(const ordered_json& spec) { return parse_profile(spec); }

ordered_json resolve_config(const std::string& subcommand, const ordered_json& config) {
    bool known_sub = false;
    for (const std::string& s : kSubcommands) known_sub = known_sub || s == subcommand;
    if (!known_sub) bad_config("unknown subcommand '" + subcommand + "'");
    if (!config.is_null() && !config.is_object()) bad_config("config must be a JSON object");

    ordered_json resolved;
    resolved["subcommand"] = subcommand;
    resolved["seed"] = 0;

    if (!config.is_null()) {
        for (const auto& [key, val] : config.items()) {
            (void)val;
            bool section = false;
            for (const std::string& s : kSubcommands) section = section || s == key;
            if (section || key == "profile" || key == "seed") continue;
            bad_config("unknown config key '" + key + "'");
        }
        if (config.contains("seed")) {
            if (!config["seed"].is_number_integer() || config["seed"].get<std::int64_t>() < 0)
                if (!config["seed"].is_number_unsigned())
                    bad_config("seed must be a nonnegative integer");
            resolved["seed"] = config["seed"].get<std::uint64_t>();
        }
    }

    if (needs_profile(subcommand)) {
        if (config.is_null() || !config.contains("profile"))
            bad_config("subcommand '" + subcommand + "' needs a 'profile'");
        // parse once here so malformed profiles fail before any simulation
        (void)parse_profile(config["profile"]);
        resolved["profile"] = config["profile"];
    }

    const ordered_json user_sec = !config.is_null() && config.contains(subcommand)
                                      ? config[subcommand]
                                      : ordered_json(nullptr);
    resolved[subcommand] = resolve_section(subcommand, user_sec);
    return resolved;
}

RunResult run_experiment(const std::string& subcommand, const ordered_json& config,
                         const std::filesystem::path& out_dir, int jobs) {
    RunResult rr;
    const auto wall0 = std::chrono::system_clock::now();
    const auto tick0 = std::chrono::steady_clock::now();

    ordered_json resolved;
    try {
        resolved = resolve_config(subcommand, config);
        fs::create_directories(out_dir);
    } catch (const std::exception& e) {
        rr.exit_code = 1;
        rr.pass = false;
        rr.error = e.what();
        return rr;
    }

    Ctx ctx{out_dir, {}};
    ordered_json results = ordered_json::array();
    bool pass = true;
    std::string error;
    try {
        if (subcommand == "classify")
            pass = run_classify(resolved, ctx, results, jobs);
        else if (subcommand == "sweep")
            pass = run_sweep(resolved, ctx, results, jobs);
        else if (subcommand == "simulate")
            pass = run_simulate(resolved, ctx, results, jobs);
        else if (subcommand == "rayknight")
            pass = run_rayknight(resolved, ctx, results, jobs);
        else if (subcommand == "verify-lln")
            pass = run_verify_lln(resolved, ctx, results, jobs);
        else if (subcommand == "verify-clt")
            pass = run_verify_clt(resolved, ctx, results, jobs);
        else if (subcommand == "drift-identity")
            pass = run_drift_identity(resolved, ctx, results, jobs);
        else if (subcommand == "d-infty")
            pass = run_d_infty(resolved, ctx, results, jobs);
        else if (subcommand == "erw")
            pass = run_erw(resolved, ctx, results, jobs);
    } catch (const std::exception& e) {
        pass = false;
        error = e.what();
    }

    ordered_json manifest;
    manifest["format"] = kManifestFormat;
    manifest["library_version"] = kLibraryVersion;
    manifest["subcommand"] = subcommand;
    manifest["master_seed"] = resolved["seed"];
    manifest["config"] = resolved;
    manifest["outputs"] = ctx.outputs;
    manifest["results"] = results;
    manifest["pass"] = pass;
    manifest["partial"] = !error.empty();
    manifest["error"] = error.empty() ? ordered_json(nullptr) : ordered_json(error);

    try {
        ctx.write("manifest.json", manifest.dump(2) + "\n", /*track=*/false);
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - tick0).count();
        char line[128];
        std::snprintf(line, sizeof line, "elapsed_seconds %.3f\njobs %d\n", elapsed, jobs);
        ctx.write("run_log.txt", "start " + iso_utc(wall0) + "\n" + line, /*track=*/false);
    } catch (const std::exception& e) {
        rr.exit_code = 1;
        rr.pass = false;
        rr.error = e.what();
        return rr;
    }

    rr.pass = pass;
    rr.outputs = ctx.outputs;
    rr.error = error;
    rr.exit_code = !error.empty() ? 1 : (pass ? 0 : 2);
    return rr;
}

}
