#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ebm/experiment.hpp"
#include "ebm/version.hpp"

namespace {

using ebm::ordered_json;

std::string flag_name(const std::string& key) {
    std::string f = "--" + key;
    for (char& c : f)
        if (c == '_') c = '-';
    return f;
}

// storage behind the generic per-section mirror flags; map nodes give the
// stable addresses CLI11 keeps
struct SubState {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    int jobs = 0;

    std::string profile_kind;
    double delta = 0.0, rate = 1.0, alpha = 0.0;
    std::vector<double> boundaries, heights;
    std::string table_path;
    bool reflect = false;

    std::map<std::string, double> nums;
    std::map<std::string, std::int64_t> ints;
    std::map<std::string, bool> bools;
    std::map<std::string, std::string> strs;
    std::map<std::string, std::vector<double>> arrays;

    CLI::App* cmd = nullptr;
};

void add_mirror_flags(CLI::App* cmd, SubState& st, const ordered_json& defaults) {
    for (const auto& [key, def] : defaults.items()) {
        const std::string flag = flag_name(key);
        if (def.is_boolean()) {
            cmd->add_flag(flag, st.bools[key]);
        } else if (def.is_number_integer()) {
            st.ints[key] = def.get<std::int64_t>();
            cmd->add_option(flag, st.ints[key])->capture_default_str();
        } else if (def.is_number()) {
            st.nums[key] = def.get<double>();
            cmd->add_option(flag, st.nums[key])->capture_default_str();
        } else if (def.is_string()) {
            st.strs[key] = def.get<std::string>();
            cmd->add_option(flag, st.strs[key])->capture_default_str();
        } else if (def.is_array()) {
            st.arrays[key] = {};
            std::string shown = "[";
            for (const auto& e : def) shown += (shown.size() > 1 ? " " : "") + e.dump();
            cmd->add_option(flag, st.arrays[key])->default_str(shown + "]");
        } else if (def.is_null()) {
            st.nums[key] = 0.0;
            cmd->add_option(flag, st.nums[key])->default_str("unset");
        }
    }
}

void add_profile_flags(CLI::App* cmd, SubState& st) {
    cmd->add_option("--profile-kind", st.profile_kind,
                    "single_cookie | piecewise_cookies | exp_decay | log_critical | custom_table "
                    "(truncated/space_damped need a config file)");
    cmd->add_option("--delta", st.delta, "total mass (single_cookie, exp_decay)");
    cmd->add_option("--rate", st.rate, "decay rate (exp_decay)")->capture_default_str();
    cmd->add_option("--alpha", st.alpha, "critical coefficient (log_critical)");
    cmd->add_option("--boundaries", st.boundaries, "piece boundaries (piecewise_cookies)");
    cmd->add_option("--heights", st.heights, "piece heights (piecewise_cookies)");
    cmd->add_option("--table-path", st.table_path, "two-column l,phi CSV (custom_table)");
    cmd->add_flag("--reflected", st.reflect, "mirror the profile across the origin");
}

ordered_json build_config(const std::string& sub, const SubState& st) {
    ordered_json config = ordered_json::object();
    if (!st.config_path.empty()) {
        std::ifstream f(st.config_path);
        if (!f) throw CLI::ValidationError("--config", "cannot open " + st.config_path);
        try {
            config = ordered_json::parse(f);
        } catch (const std::exception& e) {
            throw CLI::ValidationError("--config", std::string("JSON parse error: ") + e.what());
        }
    }

    const CLI::App* cmd = st.cmd;
    if (cmd->count("--seed") > 0) config["seed"] = st.seed;

    if (!st.profile_kind.empty()) {
        ordered_json prof;
        prof["kind"] = st.profile_kind;
        if (cmd->count("--delta") > 0) prof["delta"] = st.delta;
        if (cmd->count("--rate") > 0) prof["rate"] = st.rate;
        if (cmd->count("--alpha") > 0) prof["alpha"] = st.alpha;
        if (cmd->count("--boundaries") > 0) prof["boundaries"] = st.boundaries;
        if (cmd->count("--heights") > 0) prof["heights"] = st.heights;
        if (cmd->count("--table-path") > 0) prof["path"] = st.table_path;
        if (st.reflect) prof["reflected"] = true;
        config["profile"] = prof;
    } else if (st.reflect && config.contains("profile")) {
        config["profile"]["reflected"] = true;
    }

    if (!config.contains(sub)) config[sub] = ordered_json::object();
    for (const auto& [key, val] : st.nums)
        if (cmd->count(flag_name(key)) > 0) config[sub][key] = val;
    for (const auto& [key, val] : st.ints)
        if (cmd->count(flag_name(key)) > 0) config[sub][key] = val;
    for (const auto& [key, val] : st.strs)
        if (cmd->count(flag_name(key)) > 0) config[sub][key] = val;
    for (const auto& [key, val] : st.arrays)
        if (cmd->count(flag_name(key)) > 0) config[sub][key] = val;
    for (const auto& [key, val] : st.bools)
        if (val) config[sub][key] = true;
    return config;
}

void print_results(const std::filesystem::path& out_dir) {
    std::ifstream f(out_dir / "manifest.json");
    if (!f) return;
    ordered_json man;
    try {
        man = ordered_json::parse(f);
    } catch (...) {
        return;
    }
    for (const auto& r : man["results"]) std::cout << "  " << r.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("excited Brownian motion toolkit ") + ebm::kLibraryVersion};
    app.require_subcommand(0, 1);

    std::map<std::string, std::unique_ptr<SubState>> states;
    static const std::map<std::string, std::string> descriptions = {
        {"classify", "classify a profile from its criterion integrals (report.csv/json)"},
        {"sweep", "classify single_cookie profiles over a mass grid (sweep.csv)"},
        {"simulate", "sample excited paths (paths.csv, traces, local-time dumps)"},
        {"rayknight", "sample the dual local-time diffusion (terminal.csv, zpath dumps)"},
        {"verify-lln", "gate sample mean X_t/t against the quadrature speed"},
        {"verify-clt", "gate normalized residuals against N(0,1) at the quadrature sigma"},
        {"drift-identity", "gate E[D_{T_a}] = a for plateau profiles"},
        {"d-infty", "gate E[D_infty^k] <= 1 with E[D_infty^0] = 1 (transient right)"},
        {"erw", "discrete cookie-walk sanity ensemble (summary.csv)"},
    };

    for (const std::string& sub : ebm::subcommand_names()) {
        auto st = std::make_unique<SubState>();
        CLI::App* cmd = app.add_subcommand(sub, descriptions.at(sub));
        st->cmd = cmd;
        cmd->add_option("--config", st->config_path, "JSON config file; flags override its keys");
        cmd->add_option("--seed", st->seed, "master seed (echoed in outputs)")
            ->capture_default_str();
        cmd->add_option("--jobs", st->jobs,
                        "worker threads; 0 = available parallelism; never affects results")
            ->capture_default_str();
        cmd->add_option("--out", st->out_dir, "output directory")->capture_default_str();
        if (sub != "sweep" && sub != "erw") add_profile_flags(cmd, *st);
        add_mirror_flags(cmd, *st, ebm::subcommand_defaults(sub));
        states[sub] = std::move(st);
    }

    CLI::App* defaults_cmd =
        app.add_subcommand("defaults", "print the full default config as JSON");

    CLI11_PARSE(app, argc, argv);

    if (defaults_cmd->parsed()) {
        ordered_json all;
        all["seed"] = 0;
        all["profile"] = {{"kind", "single_cookie"}, {"delta", 3.0}};
        for (const std::string& sub : ebm::subcommand_names())
            all[sub] = ebm::subcommand_defaults(sub);
        std::cout << all.dump(2) << "\n";
        return 0;
    }

    for (const std::string& sub : ebm::subcommand_names()) {
        SubState& st = *states.at(sub);
        if (!st.cmd->parsed()) continue;
        ordered_json config;
        try {
            config = build_config(sub, st);
        } catch (const CLI::Error& e) {
            return app.exit(e);
        }
        const ebm::RunResult rr = ebm::run_experiment(sub, config, st.out_dir, st.jobs);
        if (!rr.error.empty()) {
            std::cerr << "ebm " << sub << ": " << rr.error << "\n";
            return rr.exit_code;
        }
        std::cout << "ebm " << sub << (rr.pass ? ": pass" : ": FAIL") << "; outputs in "
                  << st.out_dir << "\n";
        print_results(st.out_dir);
        return rr.exit_code;
    }

    std::cout << app.help() << "\n";
    return 0;
}
