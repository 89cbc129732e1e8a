#include "weaver/runlog.hpp"

#include "weaver/error.hpp"

namespace weaver {

namespace {

constexpr std::pair<Phase, std::string_view> kPhases[] = {{Phase::Seed, "seed"},
                                                          {Phase::Generation, "generation"},
                                                          {Phase::Regeneration, "regeneration"},
                                                          {Phase::Repair, "repair"}};
constexpr std::pair<PromptResult, std::string_view> kResults[] = {{PromptResult::CoveredTarget, "covered_target"},
                                                                  {PromptResult::NewCoverage, "new_coverage"},
                                                                  {PromptResult::NoProgress, "no_progress"},
                                                                  {PromptResult::Invalid, "invalid"}};

Json snapshot_to_json(const CoverageSnapshot& s) {
    return Json{{"covered_lines", s.covered_lines},
                {"total_lines", s.total_lines},
                {"covered_branches", s.covered_branches},
                {"total_outcomes", s.total_outcomes}};
}

CoverageSnapshot snapshot_from_json(const Json& j) {
    return CoverageSnapshot{j.at("covered_lines").get<std::int64_t>(), j.at("total_lines").get<std::int64_t>(),
                            j.at("covered_branches").get<std::int64_t>(), j.at("total_outcomes").get<std::int64_t>()};
}

Json line_to_json(const LineId& l) { return Json{{"file", l.file}, {"line", l.line}}; }
LineId line_from_json(const Json& j) { return LineId{j.at("file").get<std::string>(), j.at("line").get<int>()}; }

}  // namespace

std::string_view phase_name(Phase phase) {
    for (auto [p, n] : kPhases) {
        if (p == phase) return n;
    }
    return "?";
}

std::string_view result_name(PromptResult result) {
    for (auto [r, n] : kResults) {
        if (r == result) return n;
    }
    return "?";
}

Phase phase_from_name(std::string_view name) {
    for (auto [p, n] : kPhases) {
        if (n == name) return p;
    }
    throw IoError("unknown phase '" + std::string(name) + "'");
}

PromptResult result_from_name(std::string_view name) {
    for (auto [r, n] : kResults) {
        if (n == name) return r;
    }
    throw IoError("unknown prompt result '" + std::string(name) + "'");
}

bool made_progress(PromptResult result) {
    return result == PromptResult::CoveredTarget || result == PromptResult::NewCoverage;
}

CoverageMetrics CoverageSnapshot::metrics() const {
    CoverageMetrics m;
    if (total_lines > 0) m.line_pct = 100.0 * static_cast<double>(covered_lines) / static_cast<double>(total_lines);
    if (total_outcomes > 0) {
        m.branch_pct = 100.0 * static_cast<double>(covered_branches) / static_cast<double>(total_outcomes);
    }
    if (total_lines + total_outcomes > 0) {
        m.combined_pct = 100.0 * static_cast<double>(covered_lines + covered_branches) /
                         static_cast<double>(total_lines + total_outcomes);
    }
    return m;
}

CoverageSnapshot snapshot_of(const CoverageMap& map) {
    return CoverageSnapshot{static_cast<std::int64_t>(map.covered_lines.size()),
                            static_cast<std::int64_t>(map.total_lines()),
                            static_cast<std::int64_t>(map.covered_branches.size()),
                            static_cast<std::int64_t>(map.total_outcomes())};
}

bool at_most(const CoverageSnapshot& a, const CoverageSnapshot& b) {
    return a.covered_lines <= b.covered_lines && a.covered_branches <= b.covered_branches;
}

std::vector<CoverageSnapshot> RunLog::series() const {
    std::vector<CoverageSnapshot> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.coverage);
    return out;
}

const PhaseSummary* RunLog::phase(Phase p) const {
    for (const auto& s : phases) {
        if (s.phase == p) return &s;
    }
    return nullptr;
}

bool saturation_check(const RunLog& log) {
    const auto& r = log.records;
    if (r.size() < 2) return false;
    return !made_progress(r[r.size() - 1].result) && !made_progress(r[r.size() - 2].result);
}

Json runlog_to_json(const RunLog& log) {
    Json records = Json::array();
    for (const auto& r : log.records) {
        Json messages = Json::array();
        for (const auto& m : r.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
        records.push_back({{"index", r.index},
                           {"phase", phase_name(r.phase)},
                           {"target", r.target ? line_to_json(*r.target) : Json(nullptr)},
                           {"template", r.template_name},
                           {"note", r.note},
                           {"messages", messages},
                           {"response", r.response},
                           {"extracted_test", r.extracted_test ? Json(*r.extracted_test) : Json(nullptr)},
                           {"test_ids", r.test_ids},
                           {"result", result_name(r.result)},
                           {"tokens_in", r.tokens_in},
                           {"tokens_out", r.tokens_out},
                           {"elapsed_s", r.elapsed_s},
                           {"coverage", snapshot_to_json(r.coverage)}});
    }
    Json phases = Json::array();
    for (const auto& p : log.phases) {
        phases.push_back({{"phase", phase_name(p.phase)},
                          {"first_record", p.first_record},
                          {"end_record", p.end_record},
                          {"complete", p.complete},
                          {"coverage", snapshot_to_json(p.coverage)}});
    }
    Json unachieved = Json::array();
    for (const auto& l : log.unachieved) unachieved.push_back(line_to_json(l));
    return Json{{"v", 1},
                {"initial", snapshot_to_json(log.initial)},
                {"records", records},
                {"phases", phases},
                {"unachieved", unachieved},
                {"elapsed_s", log.elapsed_s},
                {"tokens_in", log.tokens_in},
                {"tokens_out", log.tokens_out},
                {"cost", log.cost},
                {"stop_reason", log.stop_reason}};
}

RunLog runlog_from_json(const Json& doc) {
    try {
        if (doc.at("v").get<int>() != 1) throw IoError("unsupported run log version");
        RunLog log;
        log.initial = snapshot_from_json(doc.at("initial"));
        for (const auto& j : doc.at("records")) {
            PromptRecord r;
            r.index = j.at("index").get<int>();
            r.phase = phase_from_name(j.at("phase").get<std::string>());
            if (!j.at("target").is_null()) r.target = line_from_json(j.at("target"));
            r.template_name = j.at("template").get<std::string>();
            r.note = j.at("note").get<std::string>();
            for (const auto& m : j.at("messages")) {
                r.messages.push_back(Message{m.at("role").get<std::string>(), m.at("content").get<std::string>()});
            }
            r.response = j.at("response").get<std::string>();
            if (!j.at("extracted_test").is_null()) r.extracted_test = j.at("extracted_test").get<std::string>();
            r.test_ids = j.at("test_ids").get<std::vector<std::string>>();
            r.result = result_from_name(j.at("result").get<std::string>());
            r.tokens_in = j.at("tokens_in").get<std::int64_t>();
            r.tokens_out = j.at("tokens_out").get<std::int64_t>();
            r.elapsed_s = j.at("elapsed_s").get<double>();
            r.coverage = snapshot_from_json(j.at("coverage"));
            log.records.push_back(std::move(r));
        }
        for (const auto& j : doc.at("phases")) {
            log.phases.push_back(PhaseSummary{phase_from_name(j.at("phase").get<std::string>()),
                                              j.at("first_record").get<int>(), j.at("end_record").get<int>(),
                                              snapshot_from_json(j.at("coverage")), j.at("complete").get<bool>()});
        }
        for (const auto& j : doc.at("unachieved")) log.unachieved.push_back(line_from_json(j));
        log.elapsed_s = doc.at("elapsed_s").get<double>();
        log.tokens_in = doc.at("tokens_in").get<std::int64_t>();
        log.tokens_out = doc.at("tokens_out").get<std::int64_t>();
        log.cost = doc.at("cost").get<double>();
        log.stop_reason = doc.at("stop_reason").get<std::string>();
        return log;
    } catch (const Json::exception& e) {
        throw IoError(std::string("malformed run log: ") + e.what());
    }
}

}  // namespace weaver
