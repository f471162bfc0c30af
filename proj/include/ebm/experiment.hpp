#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "ebm/profile.hpp"

namespace ebm {

using ordered_json = nlohmann::ordered_json;

// Build a profile from {"kind": ..., <params>}, with optional "reflected":
// true. Kinds: single_cookie(delta), piecewise_cookies(boundaries, heights),
// exp_decay(delta, rate), log_critical(alpha), custom_table(path), and the
// wrappers truncated(level, inner) / space_damped(scale, inner).
ExcitationProfile profile_from_json(const ordered_json& spec);

// Fill documented defaults for one subcommand and validate: unknown keys in
// the global scope, the profile object, or the active section are rejected
// (sections of other subcommands may coexist and are dropped). The returned
// object is the fully resolved config echoed into every output; it carries
// subcommand, seed, profile, and the active section, never jobs or paths
// (execution plumbing must not enter deterministic outputs).
ordered_json resolve_config(const std::string& subcommand, const ordered_json& config);

// Documented defaults of one subcommand's section (also shown by --help).
ordered_json subcommand_defaults(const std::string& subcommand);
const std::vector<std::string>& subcommand_names();

struct RunResult {
    int exit_code = 0;  // 0 ok; 1 invalid config or aborted run; 2 gated verifier failed
    bool pass = true;
    std::vector<std::string> outputs;  // file names written into out_dir
    std::string error;                 // nonempty when the run aborted partway
};

// Run one subcommand from a raw (unresolved) config. Writes the subcommand's
// data files plus manifest.json (deterministic: resolved config, seed,
// versions, outputs, pass flags) and run_log.txt (wall time; the one file
// excluded from bit-identity comparisons).
RunResult run_experiment(const std::string& subcommand, const ordered_json& config,
                         const std::filesystem::path& out_dir, int jobs);

}
