#pragma once

#include "weaver/llm.hpp"
#include "weaver/prompting.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace weaver {

struct ExecutorConfig {
    std::string kind = "shim";        // "shim" or "fixtures"
    std::string shim = "pyshim";      // shim command
    std::filesystem::path fixture_dir;  // recorded traces, for kind = "fixtures"
};

struct RunConfig {
    std::filesystem::path root = ".";
    std::vector<std::string> files = {"**/*.py"};  // globs relative to root
    std::filesystem::path out_dir = "weaver-out";
    int seed_count = 10;
    int gen_retries_per_line = 6;
    int regen_retries_per_line = 5;
    int repair_attempts = 2;
    double test_timeout_s = 10.0;
    double wall_clock_budget_s = 3 * 3600.0;
    bool saturation_stop = false;
    int workers = 1;
    std::string test_prefix = kDefaultTestPrefix;
    std::filesystem::path prompt_dir;  // empty: the installed templates
    LlmConfig llm;
    ExecutorConfig executor;
};

/// Throws ConfigError when an invariant does not hold.
void validate(const RunConfig& config);

/// Parses a TOML configuration; relative paths are resolved against
/// `base_dir`. Unknown tables and keys are rejected. Throws ConfigError.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);

/// Reads a configuration file. Throws IoError or ConfigError.
RunConfig load_config(const std::filesystem::path& path);

/// Files under `root` matching any of the globs (`*`, `?`, `**/`), as
/// sorted paths relative to `root`.
std::vector<std::string> expand_globs(const std::filesystem::path& root, const std::vector<std::string>& globs);

}  // namespace weaver
