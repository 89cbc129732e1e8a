#pragma once

#include "weaver/runlog.hpp"
#include "weaver/subject.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace weaver {

/// Decision statements plus one, summed over the functions of the unit.
/// Module-level code outside any function does not contribute.
int cyclomatic_complexity(const SourceUnit& unit);

struct PlateauStats {
    int no_progress = 0;    // prompts that added no line coverage
    std::vector<int> top;   // the three longest plateaus, longest first

    bool operator==(const PlateauStats&) const = default;
};

/// A plateau is a maximal run of consecutive prompts that add no covered
/// line (compared with the coverage right before the prompt).
PlateauStats plateau_stats(const RunLog& log);

/// Half-open range [lo, hi).
struct Bucket {
    long lo = 0;
    long hi = 0;
    std::string label() const;
};

std::vector<Bucket> default_loc_buckets();
std::vector<Bucket> default_cc_buckets();
/// Throws BucketError unless every bucket is non-empty and buckets are in
/// increasing order without overlap.
void validate_buckets(const std::vector<Bucket>& buckets);

/// Size, complexity and final coverage of one subject.
struct UnitStats {
    std::string path;
    long loc = 0;  // physical lines
    long cc = 0;
    CoverageSnapshot coverage;
};

std::vector<UnitStats> unit_stats(const std::vector<Subject>& subjects, const CoverageMap& coverage);

struct StratumRow {
    std::string label;  // "lo-hi" or "other"
    int units = 0;
    CoverageSnapshot coverage;  // pooled over the bucket's units
};

struct StratifiedReport {
    std::vector<StratumRow> by_loc;
    std::vector<StratumRow> by_cc;
};

/// Buckets units by LOC and by CC. Units outside every bucket go to a
/// trailing "other" row, present only when non-empty.
StratifiedReport stratified_report(const std::vector<UnitStats>& units,
                                   const std::vector<Bucket>& loc_buckets = default_loc_buckets(),
                                   const std::vector<Bucket>& cc_buckets = default_cc_buckets());

struct SuiteCounts {
    int passed = 0;
    int failing = 0;  // kept for coverage, but its own assertion fails
    int dropped = 0;
};

/// Everything a report is built from.
struct ReportInput {
    RunLog log;
    std::vector<UnitStats> units;
    SuiteCounts suite;
};

/// Reads runlog.json, coverage.json and suite.json from a run's output
/// directory; subjects are re-read from the recorded project root.
/// Throws IoError.
ReportInput load_report_input(const std::filesystem::path& out_dir);

enum class ReportFormat { Json, Csv, Text };
enum class Strata { Loc, Cc };

ReportFormat report_format_from_name(std::string_view name);
Strata strata_from_name(std::string_view name);

/// json: the full run log under "runlog" plus summary fields;
/// csv: one row per prompt (index, line%, branch%, combined%);
/// text: a readable summary.
std::string emit(const ReportInput& input, ReportFormat format, std::optional<Strata> strata = std::nullopt);

}  // namespace weaver
