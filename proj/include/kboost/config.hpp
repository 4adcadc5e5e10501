// Line-oriented `key = value` configuration with `#` comments, shared by
// the experiment and replication subcommands. Unknown keys are rejected
// by name with their line number.

#ifndef KBOOST_CONFIG_HPP
#define KBOOST_CONFIG_HPP

#include <string>
#include <vector>

#include "kboost/experiments.hpp"

namespace kboost {

struct ConfigEntry {
    std::string key;
    std::string value;
    int line = 0;  // 0 for command-line overrides
};

struct ConfigFile {
    std::vector<ConfigEntry> entries;

    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_text(const std::string& text, const std::string& origin);

    // Replaces the last occurrence of `key` or appends; overrides win
    // because build_run_config applies entries in order.
    void set(const std::string& key, const std::string& value);
};

enum class RunMode { experiment, trace };

// A validated run description. `trace` mode runs a single boosting path
// and emits per-iteration errors; `experiment` mode runs the full sweep.
struct RunConfig {
    RunMode mode = RunMode::experiment;
    ExperimentConfig experiment;
    int trace_n = 100;
    long iterations = 1000;
    std::string out;  // output base path; empty = standard output
};

RunConfig build_run_config(const ConfigFile& file);

// Helpers shared with the CLI flag handling.
LossKind parse_loss(const std::string& text);
std::vector<RuleSpec> parse_rules_list(const std::string& text);

}  // namespace kboost

#endif  // KBOOST_CONFIG_HPP
