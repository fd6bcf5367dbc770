#pragma once

// Command implementations behind the conservo executable, plus the config
// and CSV plumbing they share. Kept in the library so they can be tested
// directly; the binary is a thin argument-parsing shim.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "conservo/harness.hpp"

namespace conservo::cli {

struct RunConfig {
    std::string experiment;
    std::string method;                 // run/convergence
    std::vector<std::string> methods;   // table; empty selects all
    std::optional<double> tau;
    std::optional<double> t_final;
    std::optional<double> delta;
    std::optional<double> epsilon;
    std::optional<int> max_iters;
    std::optional<std::string> base_scheme;  // improved_euler | trapezoidal
    std::string output_dir = ".";
    std::optional<std::size_t> decimate;
    std::optional<std::uint64_t> seed;
    std::optional<int> halvings;  // convergence; default 3
};

/// Parse a flat `key = value` config file ('#' starts a comment). Throws
/// InvalidParams naming the offending line on malformed input.
std::map<std::string, std::string> parse_config_file(const std::string& path);

/// Fold config-file values into cfg; values already set (by command-line
/// flags) win. Throws InvalidParams naming an unknown or malformed key.
void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& kv);

// Exit codes: 0 success, 1 usage/config error, 2 truncated/failed run.
int cmd_run(const RunConfig& cfg);
int cmd_table(const RunConfig& cfg);
int cmd_list();
int cmd_convergence(const RunConfig& cfg);

/// Fixed-width float serialization used by every CSV (17 significant digits,
/// round-trip exact).
std::string format_float(double v);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const SystemSpec& sys);
void write_defect_csv(std::ostream& os, const Trajectory& traj, const SystemSpec& sys);
void write_summary_csv(std::ostream& os, const ExperimentReport& rep, std::size_t psi_dim,
                       bool include_wall);

}  // namespace conservo::cli
