#include "weaver/trace.hpp"

#include "weaver/error.hpp"

#include <cctype>
#include <map>

namespace weaver {

std::string_view status_name(OutcomeStatus status) {
    switch (status) {
        case OutcomeStatus::Passed: return "passed";
        case OutcomeStatus::Failed: return "failed";
        case OutcomeStatus::Error: return "error";
        case OutcomeStatus::Timeout: return "timeout";
    }
    return "error";
}

namespace {

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    auto c0 = static_cast<unsigned char>(s[0]);
    if (!(std::isalpha(c0) || c0 == '_' || c0 >= 0x80)) return false;
    for (char ch : s) {
        auto c = static_cast<unsigned char>(ch);
        if (!(std::isalnum(c) || c == '_' || c >= 0x80)) return false;
    }
    return true;
}

const Json& field(const Json& obj, const char* key, const std::string& at) {
    auto it = obj.find(key);
    if (it == obj.end()) throw TraceFormatError(at, std::string("missing field '") + key + "'");
    return *it;
}

int positive_int(const Json& v, const std::string& at) {
    if (!v.is_number_integer()) throw TraceFormatError(at, "expected an integer");
    auto n = v.get<long long>();
    if (n < 1 || n > 100000000) throw TraceFormatError(at, "expected a positive integer");
    return static_cast<int>(n);
}

}  // namespace

ExecutionTrace parse_trace(const Json& doc) {
    if (!doc.is_object()) throw TraceFormatError("$", "expected an object");
    const auto& v = field(doc, "v", "$");
    if (!v.is_number_integer() || v.get<long long>() != 1) throw TraceFormatError("$.v", "unsupported schema version");

    ExecutionTrace trace;
    const auto& id = field(doc, "test_id", "$");
    if (!id.is_string()) throw TraceFormatError("$.test_id", "expected a string");
    trace.test_id = id.get<std::string>();

    const auto& outcome = field(doc, "outcome", "$");
    if (!outcome.is_object()) throw TraceFormatError("$.outcome", "expected an object");
    const auto& status = field(outcome, "status", "$.outcome");
    if (!status.is_string()) throw TraceFormatError("$.outcome.status", "expected a string");
    auto s = status.get<std::string>();
    if (s == "passed") trace.outcome.status = OutcomeStatus::Passed;
    else if (s == "failed") trace.outcome.status = OutcomeStatus::Failed;
    else if (s == "error") trace.outcome.status = OutcomeStatus::Error;
    else if (s == "timeout") trace.outcome.status = OutcomeStatus::Timeout;
    else throw TraceFormatError("$.outcome.status", "unknown status '" + s + "'");
    if (auto m = outcome.find("message"); m != outcome.end()) {
        if (!m->is_string()) throw TraceFormatError("$.outcome.message", "expected a string");
        trace.outcome.message = m->get<std::string>();
    }

    const auto& events = field(doc, "events", "$");
    if (!events.is_array()) throw TraceFormatError("$.events", "expected an array");
    int previous = 0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const std::string at = "$.events[" + std::to_string(i) + "]";
        const auto& e = events[i];
        if (!e.is_object()) throw TraceFormatError(at, "expected an object");
        TraceEvent ev;
        ev.step = positive_int(field(e, "k", at), at + ".k");
        if (ev.step <= previous) throw TraceFormatError(at + ".k", "steps must be strictly increasing");
        previous = ev.step;
        const auto& file = field(e, "file", at);
        if (!file.is_string()) throw TraceFormatError(at + ".file", "expected a string");
        ev.line = LineId{file.get<std::string>(), positive_int(field(e, "line", at), at + ".line")};
        const auto& vars = field(e, "vars", at);
        if (!vars.is_object()) throw TraceFormatError(at + ".vars", "expected an object");
        for (auto it = vars.begin(); it != vars.end(); ++it) {
            if (!is_identifier(it.key())) throw TraceFormatError(at + ".vars", "'" + it.key() + "' is not an identifier");
            if (!it.value().is_string()) throw TraceFormatError(at + ".vars." + it.key(), "expected a string");
            ev.bindings.emplace_back(it.key(), it.value().get<std::string>());
        }
        trace.executed_lines.insert(ev.line);
        trace.events.push_back(std::move(ev));
    }
    return trace;
}

ExecutionTrace parse_trace(std::string_view raw) {
    Json doc;
    try {
        doc = Json::parse(raw);
    } catch (const Json::parse_error& e) {
        throw TraceFormatError("byte " + std::to_string(e.byte), "invalid JSON");
    }
    return parse_trace(doc);
}

Json trace_to_json(const ExecutionTrace& trace) {
    Json events = Json::array();
    for (const auto& e : trace.events) {
        Json vars = Json::object();
        for (const auto& [k, v] : e.bindings) vars[k] = v;
        events.push_back(Json{{"k", e.step}, {"file", e.line.file}, {"line", e.line.line}, {"vars", vars}});
    }
    return Json{{"v", 1},
                {"test_id", trace.test_id},
                {"outcome", {{"status", status_name(trace.outcome.status)}, {"message", trace.outcome.message}}},
                {"events", events}};
}

std::string truncate_value(std::string_view value, std::size_t max_chars) {
    std::size_t chars = 0;
    for (std::size_t i = 0; i < value.size(); ++i) {
        if ((static_cast<unsigned char>(value[i]) & 0xC0) == 0x80) continue;  // continuation byte
        if (chars == max_chars) return std::string(value.substr(0, i)) + "…";
        ++chars;
    }
    return std::string(value);
}

namespace {

/// Executable statement line an event line belongs to (events may name a
/// continuation line of a multi-line statement), or 0.
int statement_line(const SourceUnit& unit, int line) {
    auto idx = unit.statement_at(line);
    if (!idx) return 0;
    return unit.statements[static_cast<std::size_t>(*idx)].line;
}

/// Where control lands after following `node`: the first executable
/// statement line, or 0 for the region exit. Non-executable structural
/// nodes (`else:`) are passed through.
int landing(const Subject& s, int node) {
    for (int guard = 0; guard < 64; ++guard) {
        const auto& n = s.cfg.nodes[static_cast<std::size_t>(node)];
        if (n.kind == NodeKind::Exit) return 0;
        if (n.kind == NodeKind::Statement &&
            is_executable(s.unit.statements[static_cast<std::size_t>(n.stmt)].kind))
            return n.line;
        if (n.succ.size() != 1) return -1;
        node = n.succ.front().target;
    }
    return -1;
}

}  // namespace

std::set<BranchOutcome> branch_outcomes(const ExecutionTrace& trace, const Subject& subject) {
    const auto& unit = subject.unit;
    const auto& cfg = subject.cfg;

    // Events of this subject, normalised to statement lines, with their region.
    struct Local {
        int line;
        int region;
    };
    std::vector<Local> local;
    std::map<std::string, bool> file_match;
    for (const auto& e : trace.events) {
        auto [it, fresh] = file_match.emplace(e.line.file, false);
        if (fresh) it->second = same_file(e.line.file, unit.path);
        if (!it->second) continue;
        int line = statement_line(unit, e.line.line);
        auto region = line > 0 ? cfg.region_of(line) : std::nullopt;
        if (!region) continue;
        local.push_back(Local{line, *region});
    }

    std::set<BranchOutcome> out;
    for (std::size_t i = 0; i < local.size(); ++i) {
        int d = local[i].line;
        if (unit.decision_lines.count(d) == 0) continue;
        int region = local[i].region;
        // Repeats of the decision line itself (comprehension frames, for
        // example) are not a transition.
        std::optional<int> next;
        for (std::size_t j = i + 1; j < local.size(); ++j) {
            if (local[j].region == region && local[j].line != d) {
                next = local[j].line;
                break;
            }
        }

        const auto& node = cfg.nodes[static_cast<std::size_t>(cfg.line_index.at(d))];
        std::vector<std::pair<int, bool>> lands;  // landing line, polarity
        for (const auto& e : node.succ) lands.emplace_back(landing(subject, e.target), e.kind == EdgeKind::BranchTrue);

        auto unique_polarity = [&](int target) -> std::optional<bool> {
            std::optional<bool> found;
            for (const auto& [line, pol] : lands) {
                if (line != target) continue;
                if (found && *found != pol) return std::nullopt;
                found = pol;
            }
            return found;
        };

        std::optional<bool> polarity;
        if (next) polarity = unique_polarity(*next);
        if (!polarity) {
            // The region finished after the decision: either nothing more ran
            // in it, or it was entered afresh by a new call.
            const auto& r = cfg.regions[static_cast<std::size_t>(region)];
            int first = landing(subject, cfg.nodes[static_cast<std::size_t>(r.entry)].succ.front().target);
            if (!next || *next == first) polarity = unique_polarity(0);
        }
        if (polarity) out.insert(BranchOutcome{unit.line_id(d), *polarity});
    }
    return out;
}

CoverageUniverse universe_of(const std::vector<Subject>& subjects) {
    CoverageUniverse u;
    for (const auto& s : subjects) {
        for (int l : s.unit.executable_lines) u.lines.insert(s.unit.line_id(l));
        for (int l : s.unit.decision_lines) u.decisions.insert(s.unit.line_id(l));
    }
    return u;
}

CoverageMap coverage_of(const ExecutionTrace& trace, const std::vector<Subject>& subjects,
                        const CoverageUniverse& universe) {
    CoverageMap map;
    map.universe = universe;
    std::map<std::string, const Subject*> by_file;
    for (const auto& e : trace.events) {
        auto [it, fresh] = by_file.emplace(e.line.file, nullptr);
        if (fresh) it->second = find_subject(subjects, e.line.file);
        if (it->second == nullptr) continue;
        int line = statement_line(it->second->unit, e.line.line);
        LineId id = it->second->unit.line_id(line);
        if (line > 0 && universe.lines.count(id)) map.covered_lines.insert(id);
    }
    for (const auto& s : subjects) {
        for (const auto& b : branch_outcomes(trace, s)) {
            if (universe.decisions.count(b.decision)) map.covered_branches.insert(b);
        }
    }
    return map;
}

CoverageMetrics coverage_metrics(const CoverageMap& map) {
    CoverageMetrics m;
    auto lines = static_cast<double>(map.covered_lines.size());
    auto branches = static_cast<double>(map.covered_branches.size());
    auto tl = static_cast<double>(map.total_lines());
    auto tb = static_cast<double>(map.total_outcomes());
    if (tl > 0) m.line_pct = 100.0 * lines / tl;
    if (tb > 0) m.branch_pct = 100.0 * branches / tb;
    if (tl + tb > 0) m.combined_pct = 100.0 * (lines + branches) / (tl + tb);
    return m;
}

CoverageMap merge(const std::vector<CoverageMap>& maps) {
    CoverageMap out;
    if (maps.empty()) return out;
    out.universe = maps.front().universe;
    for (const auto& m : maps) {
        if (!(m.universe == out.universe)) throw UniverseMismatch("coverage maps measure different universes");
        out.covered_lines.insert(m.covered_lines.begin(), m.covered_lines.end());
        out.covered_branches.insert(m.covered_branches.begin(), m.covered_branches.end());
    }
    return out;
}

namespace {

Json line_list(const std::set<LineId>& lines) {
    Json a = Json::array();
    for (const auto& l : lines) a.push_back(Json::array({l.file, l.line}));
    return a;
}

std::set<LineId> line_set(const Json& a) {
    std::set<LineId> out;
    for (const auto& e : a) out.insert(LineId{e.at(0).get<std::string>(), e.at(1).get<int>()});
    return out;
}

}  // namespace

Json coverage_to_json(const CoverageMap& map) {
    Json branches = Json::array();
    for (const auto& b : map.covered_branches) branches.push_back(Json::array({b.decision.file, b.decision.line, b.polarity}));
    auto m = coverage_metrics(map);
    auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
    return Json{{"universe", {{"lines", line_list(map.universe.lines)}, {"decisions", line_list(map.universe.decisions)}}},
                {"covered_lines", line_list(map.covered_lines)},
                {"covered_branches", branches},
                {"metrics", {{"line_pct", opt(m.line_pct)}, {"branch_pct", opt(m.branch_pct)}, {"combined_pct", opt(m.combined_pct)}}}};
}

CoverageMap coverage_from_json(const Json& doc) {
    CoverageMap map;
    map.universe.lines = line_set(doc.at("universe").at("lines"));
    map.universe.decisions = line_set(doc.at("universe").at("decisions"));
    map.covered_lines = line_set(doc.at("covered_lines"));
    for (const auto& b : doc.at("covered_branches")) {
        map.covered_branches.insert(BranchOutcome{LineId{b.at(0).get<std::string>(), b.at(1).get<int>()}, b.at(2).get<bool>()});
    }
    return map;
}

}  // namespace weaver
