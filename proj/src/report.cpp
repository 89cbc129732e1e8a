#include "weaver/report.hpp"

#include "weaver/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fs = std::filesystem;

namespace weaver {

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json parse_file(const fs::path& path) {
    try {
        return Json::parse(read_text(path));
    } catch (const Json::exception& e) {
        throw IoError("malformed " + path.string() + ": " + e.what());
    }
}

std::string pct(const std::optional<double>& v) {
    if (!v) return "n/a";
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(2) << *v;
    return ss.str();
}

std::string pct_sign(const std::optional<double>& v) { return v ? pct(v) + "%" : "n/a"; }

Json pct_json(const std::optional<double>& v) { return v ? Json(std::round(*v * 100.0) / 100.0) : Json(nullptr); }

CoverageSnapshot& operator+=(CoverageSnapshot& a, const CoverageSnapshot& b) {
    a.covered_lines += b.covered_lines;
    a.total_lines += b.total_lines;
    a.covered_branches += b.covered_branches;
    a.total_outcomes += b.total_outcomes;
    return a;
}

std::vector<StratumRow> stratify(const std::vector<UnitStats>& units, const std::vector<Bucket>& buckets,
                                 long UnitStats::*key) {
    validate_buckets(buckets);
    std::vector<StratumRow> rows;
    for (const auto& b : buckets) rows.push_back(StratumRow{b.label(), 0, {}});
    StratumRow other{"other", 0, {}};
    for (const auto& u : units) {
        long v = u.*key;
        auto it = std::find_if(buckets.begin(), buckets.end(), [&](const Bucket& b) { return v >= b.lo && v < b.hi; });
        StratumRow& row = it == buckets.end() ? other : rows[static_cast<std::size_t>(it - buckets.begin())];
        ++row.units;
        row.coverage += u.coverage;
    }
    if (other.units > 0) rows.push_back(other);
    return rows;
}

Json snapshot_json(const CoverageSnapshot& s) {
    auto m = s.metrics();
    return Json{{"covered_lines", s.covered_lines},       {"total_lines", s.total_lines},
                {"covered_branches", s.covered_branches}, {"total_outcomes", s.total_outcomes},
                {"line_pct", pct_json(m.line_pct)},       {"branch_pct", pct_json(m.branch_pct)},
                {"combined_pct", pct_json(m.combined_pct)}};
}

Json rows_json(const std::vector<StratumRow>& rows) {
    Json out = Json::array();
    for (const auto& r : rows) {
        Json j = snapshot_json(r.coverage);
        j["bucket"] = r.label;
        j["units"] = r.units;
        out.push_back(std::move(j));
    }
    return out;
}

double run_time_s(const RunLog& log) { return log.records.empty() ? 0.0 : log.records.back().elapsed_s; }

CoverageSnapshot final_coverage(const RunLog& log) {
    return log.records.empty() ? log.initial : log.records.back().coverage;
}

std::string emit_json(const ReportInput& in, std::optional<Strata> strata) {
    const RunLog& log = in.log;
    auto plateaus = plateau_stats(log);
    Json progression = Json::array();
    for (const auto& r : log.records) {
        auto m = r.coverage.metrics();
        progression.push_back(Json{{"prompt", r.index},
                                   {"line_pct", pct_json(m.line_pct)},
                                   {"branch_pct", pct_json(m.branch_pct)},
                                   {"combined_pct", pct_json(m.combined_pct)}});
    }
    Json phases = Json::array();
    for (const auto& p : log.phases) {
        Json j = snapshot_json(p.coverage);
        j["phase"] = phase_name(p.phase);
        j["prompts"] = p.end_record - p.first_record;
        j["complete"] = p.complete;
        phases.push_back(std::move(j));
    }
    Json summary{{"prompts", log.records.size()},
                 {"stop_reason", log.stop_reason},
                 {"run_time_hours", run_time_s(log) / 3600.0},
                 {"tokens_in", log.tokens_in},
                 {"tokens_out", log.tokens_out},
                 {"cost", log.cost},
                 {"coverage", snapshot_json(final_coverage(log))},
                 {"phases", phases},
                 {"unachieved_lines", log.unachieved.size()},
                 {"tests", Json{{"passed", in.suite.passed}, {"failing", in.suite.failing}, {"dropped", in.suite.dropped}}},
                 {"plateaus", Json{{"no_progress_prompts", plateaus.no_progress}, {"top", plateaus.top}}}};
    Json doc{{"v", 1}, {"summary", summary}, {"progression", progression}, {"runlog", runlog_to_json(log)}};
    if (strata) {
        auto table = stratified_report(in.units);
        doc["strata"] = Json{{"by", *strata == Strata::Loc ? "loc" : "cc"},
                             {"rows", rows_json(*strata == Strata::Loc ? table.by_loc : table.by_cc)}};
    }
    return doc.dump(1) + "\n";
}

std::string emit_csv(const ReportInput& in) {
    std::ostringstream out;
    out << "prompt,line_pct,branch_pct,combined_pct\n";
    for (const auto& r : in.log.records) {
        auto m = r.coverage.metrics();
        out << r.index << ',' << pct(m.line_pct) << ',' << pct(m.branch_pct) << ',' << pct(m.combined_pct) << '\n';
    }
    return out.str();
}

std::string emit_text(const ReportInput& in, std::optional<Strata> strata) {
    const RunLog& log = in.log;
    std::ostringstream out;
    auto cov = final_coverage(log);
    auto m = cov.metrics();
    out << "Run summary\n";
    out << "  stop reason:      " << log.stop_reason << '\n';
    out << "  prompts:          " << log.records.size() << '\n';
    out << "  run time (hours): " << std::fixed << std::setprecision(3) << run_time_s(log) / 3600.0 << '\n';
    out << "  tokens in/out:    " << log.tokens_in << " / " << log.tokens_out << '\n';
    out << "  token cost:       " << std::fixed << std::setprecision(4) << log.cost << '\n';
    out << "  line coverage:    " << pct_sign(m.line_pct) << " (" << cov.covered_lines << '/' << cov.total_lines << ")\n";
    out << "  branch coverage:  " << pct_sign(m.branch_pct) << " (" << cov.covered_branches << '/' << cov.total_outcomes
        << ")\n";
    out << "  line+branch:      " << pct_sign(m.combined_pct) << "\n";
    out << "  tests:            " << in.suite.passed << " passing, " << in.suite.failing << " failing (kept), "
        << in.suite.dropped << " dropped\n";
    out << "\nPhases\n";
    for (const auto& p : log.phases) {
        auto pm = p.coverage.metrics();
        out << "  " << std::left << std::setw(13) << phase_name(p.phase) << std::right << std::setw(4)
            << (p.end_record - p.first_record) << " prompts  line " << pct_sign(pm.line_pct) << "  branch "
            << pct_sign(pm.branch_pct) << (p.complete ? "" : "  (interrupted)") << '\n';
    }
    auto plateaus = plateau_stats(log);
    out << "\nPlateaus\n";
    out << "  no-progress prompts: " << plateaus.no_progress << '\n';
    out << "  longest:             ";
    if (plateaus.top.empty()) out << "none";
    for (std::size_t i = 0; i < plateaus.top.size(); ++i) out << (i ? ", " : "") << plateaus.top[i];
    out << '\n';
    out << "\nUnachieved lines: " << log.unachieved.size() << '\n';
    for (const auto& l : log.unachieved) out << "  " << to_string(l) << '\n';
    if (strata) {
        auto table = stratified_report(in.units);
        const auto& rows = *strata == Strata::Loc ? table.by_loc : table.by_cc;
        out << "\nCoverage by " << (*strata == Strata::Loc ? "lines of code" : "cyclomatic complexity") << '\n';
        for (const auto& r : rows) {
            auto rm = r.coverage.metrics();
            out << "  " << std::left << std::setw(10) << r.label << std::right << std::setw(4) << r.units
                << " units  line " << pct_sign(rm.line_pct) << "  branch " << pct_sign(rm.branch_pct)
                << "  combined " << pct_sign(rm.combined_pct) << '\n';
        }
    }
    return out.str();
}

}  // namespace

int cyclomatic_complexity(const SourceUnit& unit) {
    int total = static_cast<int>(unit.functions.size());
    for (const auto& s : unit.statements) {
        if (s.function >= 0 && is_decision(s.kind)) ++total;
    }
    return total;
}

PlateauStats plateau_stats(const RunLog& log) {
    PlateauStats stats;
    std::vector<int> runs;
    std::int64_t before = log.initial.covered_lines;
    int current = 0;
    for (const auto& r : log.records) {
        if (r.coverage.covered_lines > before) {
            if (current > 0) runs.push_back(current);
            current = 0;
        } else {
            ++current;
            ++stats.no_progress;
        }
        before = std::max(before, r.coverage.covered_lines);
    }
    if (current > 0) runs.push_back(current);
    std::sort(runs.begin(), runs.end(), std::greater<>());
    runs.resize(std::min<std::size_t>(runs.size(), 3));
    stats.top = std::move(runs);
    return stats;
}

std::string Bucket::label() const { return std::to_string(lo) + "-" + std::to_string(hi); }

std::vector<Bucket> default_loc_buckets() { return {{0, 150}, {150, 500}, {500, 1100}}; }
std::vector<Bucket> default_cc_buckets() { return {{1, 50}, {50, 100}, {100, 200}, {200, 300}}; }

void validate_buckets(const std::vector<Bucket>& buckets) {
    for (std::size_t i = 0; i < buckets.size(); ++i) {
        if (buckets[i].lo >= buckets[i].hi) throw BucketError("empty bucket " + buckets[i].label());
        if (i > 0 && buckets[i].lo < buckets[i - 1].hi) {
            throw BucketError("bucket " + buckets[i].label() + " overlaps or precedes " + buckets[i - 1].label());
        }
    }
}

std::vector<UnitStats> unit_stats(const std::vector<Subject>& subjects, const CoverageMap& coverage) {
    std::vector<UnitStats> out;
    for (const auto& s : subjects) {
        UnitStats u;
        u.path = s.unit.path;
        u.loc = s.unit.line_count();
        u.cc = cyclomatic_complexity(s.unit);
        auto in_unit = [&](const LineId& id) { return same_file(id.file, s.unit.path); };
        u.coverage.total_lines = std::count_if(coverage.universe.lines.begin(), coverage.universe.lines.end(), in_unit);
        u.coverage.total_outcomes =
            2 * std::count_if(coverage.universe.decisions.begin(), coverage.universe.decisions.end(), in_unit);
        u.coverage.covered_lines = std::count_if(coverage.covered_lines.begin(), coverage.covered_lines.end(), in_unit);
        u.coverage.covered_branches =
            std::count_if(coverage.covered_branches.begin(), coverage.covered_branches.end(),
                          [&](const BranchOutcome& b) { return in_unit(b.decision); });
        out.push_back(std::move(u));
    }
    return out;
}

StratifiedReport stratified_report(const std::vector<UnitStats>& units, const std::vector<Bucket>& loc_buckets,
                                   const std::vector<Bucket>& cc_buckets) {
    return StratifiedReport{stratify(units, loc_buckets, &UnitStats::loc), stratify(units, cc_buckets, &UnitStats::cc)};
}

ReportInput load_report_input(const fs::path& out_dir) {
    ReportInput in;
    in.log = runlog_from_json(parse_file(out_dir / "runlog.json"));
    Json suite = parse_file(out_dir / "suite.json");
    CoverageMap coverage;
    try {
        coverage = coverage_from_json(parse_file(out_dir / "coverage.json"));
        fs::path root = suite.at("root").get<std::string>();
        std::vector<Subject> subjects;
        for (const auto& rel : suite.at("subjects")) {
            auto r = rel.get<std::string>();
            subjects.push_back(make_subject(read_text(root / r), r, r));
        }
        in.units = unit_stats(subjects, coverage);
        for (const auto& t : suite.at("tests")) {
            if (t.at("status").get<std::string>() != "valid") {
                ++in.suite.dropped;
            } else if (t.at("outcome") == "failed") {
                ++in.suite.failing;
            } else {
                ++in.suite.passed;
            }
        }
    } catch (const Json::exception& e) {
        throw IoError("malformed run output in " + out_dir.string() + ": " + e.what());
    }
    return in;
}

ReportFormat report_format_from_name(std::string_view name) {
    if (name == "json") return ReportFormat::Json;
    if (name == "csv") return ReportFormat::Csv;
    if (name == "text") return ReportFormat::Text;
    throw Error("unknown report format '" + std::string(name) + "'");
}

Strata strata_from_name(std::string_view name) {
    if (name == "loc") return Strata::Loc;
    if (name == "cc") return Strata::Cc;
    throw Error("unknown strata '" + std::string(name) + "'");
}

std::string emit(const ReportInput& input, ReportFormat format, std::optional<Strata> strata) {
    switch (format) {
        case ReportFormat::Json: return emit_json(input, strata);
        case ReportFormat::Csv: return emit_csv(input);
        case ReportFormat::Text: return emit_text(input, strata);
    }
    return {};
}

}  // namespace weaver
