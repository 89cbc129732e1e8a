#pragma once

#include "weaver/message.hpp"
#include "weaver/trace.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace weaver {

enum class Phase { Seed, Generation, Regeneration, Repair };
enum class PromptResult { CoveredTarget, NewCoverage, NoProgress, Invalid };

std::string_view phase_name(Phase phase);
std::string_view result_name(PromptResult result);
Phase phase_from_name(std::string_view name);
PromptResult result_from_name(std::string_view name);

/// True for results that added line coverage.
bool made_progress(PromptResult result);

/// Coverage counts at one point of a run.
struct CoverageSnapshot {
    std::int64_t covered_lines = 0;
    std::int64_t total_lines = 0;
    std::int64_t covered_branches = 0;
    std::int64_t total_outcomes = 0;

    CoverageMetrics metrics() const;
    bool operator==(const CoverageSnapshot&) const = default;
};

CoverageSnapshot snapshot_of(const CoverageMap& map);

/// Component-wise ≤.
bool at_most(const CoverageSnapshot& a, const CoverageSnapshot& b);

/// One exchange with the model.
struct PromptRecord {
    int index = 0;
    Phase phase = Phase::Seed;
    std::optional<LineId> target;
    std::string template_name;
    std::string note;  // e.g. why a fallback template was used
    Messages messages;
    std::string response;
    std::optional<std::string> extracted_test;
    std::vector<std::string> test_ids;  // tests this response added to the suite
    PromptResult result = PromptResult::Invalid;
    std::int64_t tokens_in = 0;
    std::int64_t tokens_out = 0;
    double elapsed_s = 0.0;     // since the start of the run
    CoverageSnapshot coverage;  // suite coverage once this response was handled

    bool operator==(const PromptRecord&) const = default;
};

struct PhaseSummary {
    Phase phase = Phase::Seed;
    int first_record = 0;  // [first_record, end_record)
    int end_record = 0;
    CoverageSnapshot coverage;  // at the end of the phase
    bool complete = true;       // false when the run stopped inside the phase

    bool operator==(const PhaseSummary&) const = default;
};

struct RunLog {
    CoverageSnapshot initial;
    std::vector<PromptRecord> records;
    std::vector<PhaseSummary> phases;
    std::vector<LineId> unachieved;
    double elapsed_s = 0.0;
    std::int64_t tokens_in = 0;
    std::int64_t tokens_out = 0;
    double cost = 0.0;
    std::string stop_reason = "completed";  // completed, wall_clock or token_budget

    /// Per-prompt coverage series.
    std::vector<CoverageSnapshot> series() const;
    const PhaseSummary* phase(Phase p) const;
    bool operator==(const RunLog&) const = default;
};

/// True when the last two prompts both added no line coverage.
bool saturation_check(const RunLog& log);

Json runlog_to_json(const RunLog& log);
/// Throws IoError on a malformed document.
RunLog runlog_from_json(const Json& doc);

}  // namespace weaver
