#pragma once

#include "weaver/subject.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace weaver {

using Json = nlohmann::ordered_json;

enum class OutcomeStatus { Passed, Failed, Error, Timeout };

std::string_view status_name(OutcomeStatus status);

struct Outcome {
    OutcomeStatus status = OutcomeStatus::Error;
    std::string message;

    /// Passed and failed tests both ran to completion; a failing assertion
    /// still yields a usable regression test.
    bool ran() const { return status == OutcomeStatus::Passed || status == OutcomeStatus::Failed; }
};

struct TraceEvent {
    int step = 0;  // 1-based, strictly increasing
    LineId line;
    std::vector<std::pair<std::string, std::string>> bindings;  // post-state, in shim order
};

struct ExecutionTrace {
    std::string test_id;
    std::vector<TraceEvent> events;
    std::set<LineId> executed_lines;
    Outcome outcome;
};

/// Validates and converts one trace document (schema version 1).
/// Throws TraceFormatError(position, reason); malformed documents are
/// rejected whole.
ExecutionTrace parse_trace(const Json& doc);
ExecutionTrace parse_trace(std::string_view raw);
inline ExecutionTrace parse_trace(const std::string& raw) { return parse_trace(std::string_view(raw)); }
inline ExecutionTrace parse_trace(const char* raw) { return parse_trace(std::string_view(raw)); }

Json trace_to_json(const ExecutionTrace& trace);

/// Truncates a rendered value to `max_chars` characters (UTF-8 code points)
/// followed by an ellipsis.
std::string truncate_value(std::string_view value, std::size_t max_chars = 60);

struct BranchOutcome {
    LineId decision;
    bool polarity = true;

    auto operator<=>(const BranchOutcome&) const = default;
};

/// Decision outcomes observed in a trace for one subject: each event on a
/// decision line is paired with the next event in the same region, and the
/// CFG edge connecting them (through `else:` keywords) gives the polarity.
/// When the region finishes right after the decision and exactly one edge
/// leads to the region exit, that edge's polarity is taken.
std::set<BranchOutcome> branch_outcomes(const ExecutionTrace& trace, const Subject& subject);

/// The universes coverage is measured against.
struct CoverageUniverse {
    std::set<LineId> lines;      // executable lines
    std::set<LineId> decisions;  // decision lines; each contributes two outcomes

    bool operator==(const CoverageUniverse&) const = default;
};

CoverageUniverse universe_of(const std::vector<Subject>& subjects);

struct CoverageMap {
    CoverageUniverse universe;
    std::set<LineId> covered_lines;
    std::set<BranchOutcome> covered_branches;

    std::size_t total_lines() const { return universe.lines.size(); }
    std::size_t total_outcomes() const { return 2 * universe.decisions.size(); }
    bool operator==(const CoverageMap&) const = default;
};

/// Coverage contributed by one trace.
CoverageMap coverage_of(const ExecutionTrace& trace, const std::vector<Subject>& subjects,
                        const CoverageUniverse& universe);

/// Percentages in [0, 100]; a ratio whose total is zero is not applicable.
struct CoverageMetrics {
    std::optional<double> line_pct;
    std::optional<double> branch_pct;
    std::optional<double> combined_pct;
};

CoverageMetrics coverage_metrics(const CoverageMap& map);

/// Set union of maps over one universe. Throws UniverseMismatch.
CoverageMap merge(const std::vector<CoverageMap>& maps);

Json coverage_to_json(const CoverageMap& map);
CoverageMap coverage_from_json(const Json& doc);

}  // namespace weaver
