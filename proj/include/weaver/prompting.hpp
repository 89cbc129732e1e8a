#pragma once

#include "weaver/message.hpp"
#include "weaver/retrieval.hpp"
#include "weaver/slicer.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace weaver {

inline constexpr const char* kDefaultTestPrefix = "test_weaver_";

/// Prompt templates read from a directory holding generation.txt,
/// regeneration.txt, seed.txt and repair.txt.
class PromptLibrary {
public:
    /// Throws ConfigError when a template file is missing or unreadable.
    static PromptLibrary load(const std::filesystem::path& dir);
    /// The directory the build was configured with.
    static std::filesystem::path default_dir();

    const std::string& get(const std::string& name) const;

private:
    std::map<std::string, std::string> templates_;
};

/// Replaces every `{name}` in `text` with `values.at(name)` in a single pass;
/// substituted text is never rescanned. Throws Error for a placeholder with
/// no value.
std::string render_template(const std::string& text, const std::map<std::string, std::string>& values);

/// Names of the `{identifier}` placeholders in a template, in order of
/// appearance, with repeats.
std::vector<std::string> placeholders(const std::string& text);

/// Where the function under test lives.
struct PromptContext {
    std::string module;      // dotted import name
    std::string class_name;  // empty for module-level functions
    std::string func_name;   // empty for module-level code
    std::string test_prefix = kDefaultTestPrefix;
};

/// The context of the code enclosing `line`.
PromptContext context_for(const SourceUnit& unit, const std::string& module, int line);

/// `<line>: <source>` with indentation and comments removed.
std::string target_line_text(const SourceUnit& unit, int line);

/// The opening the generated test must start with: an import of the code
/// under test followed by the start of a prefixed test function.
std::string test_header(const PromptContext& ctx);

Messages build_generation_prompt(const PromptLibrary& lib, const Slice& slice, const SourceUnit& unit,
                                 const PromptContext& ctx);

/// Throws Error when there is no closest test.
Messages build_regeneration_prompt(const PromptLibrary& lib, const std::string& annotated_slice,
                                   const TestCase* closest_test, const LineId& target, const SourceUnit& unit,
                                   const PromptContext& ctx);

Messages build_seed_prompt(const PromptLibrary& lib, const SourceUnit& unit, const PromptContext& ctx,
                           int test_count);

Messages build_repair_prompt(const PromptLibrary& lib, const std::string& test_source,
                             const std::string& error_message, const PromptContext& ctx);

/// The candidate test in a model response: the content of the `<answer>`
/// section (its fenced block when it has one), else the last fenced code
/// block, else nothing. The candidate must define a function whose name
/// starts with `prefix`.
std::optional<std::string> extract_test(const std::string& response, const std::string& prefix = kDefaultTestPrefix);

/// Splits a source holding several prefixed test functions into one source
/// per test; every part keeps the shared imports and helpers.
std::vector<std::string> split_tests(const std::string& source, const std::string& prefix = kDefaultTestPrefix);

/// Name of the first prefixed test function in `source`.
std::optional<std::string> test_function_name(const std::string& source, const std::string& prefix = kDefaultTestPrefix);

}  // namespace weaver
