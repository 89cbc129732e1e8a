#include "weaver/inliner.hpp"

#include "weaver/error.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace weaver {

namespace {

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

std::vector<std::string> shown_names(const Statement& stmt) {
    std::vector<std::string> names;
    auto add = [&](const std::vector<std::string>& from) {
        for (const auto& n : from) {
            if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
        }
    };
    add(stmt.referenced);
    add(stmt.defined);
    return names;
}

std::string describe(const TraceEvent& event, const std::vector<std::string>& names) {
    std::string out = "(" + std::to_string(event.step) + ")";
    bool first = true;
    for (const auto& name : names) {
        auto it = std::find_if(event.bindings.begin(), event.bindings.end(),
                               [&](const auto& b) { return b.first == name; });
        if (it == event.bindings.end()) continue;
        out += first ? " " : "; ";
        out += name + " = " + it->second;
        first = false;
    }
    return out;
}

}  // namespace

std::string annotate_slice(const Slice& slice, const SourceUnit& unit, const ExecutionTrace& trace) {
    // Visits per original statement line, in trace order.
    std::map<int, std::vector<const TraceEvent*>> visits;
    for (const auto& event : trace.events) {
        if (!same_file(event.line.file, unit.path)) continue;
        if (event.line.line < 1 || event.line.line > unit.line_count()) {
            throw LineMismatch("trace line " + to_string(event.line) + " is outside " + unit.path);
        }
        if (slice.retained.count(event.line.line)) visits[event.line.line].push_back(&event);
    }

    auto code = split_lines(strip_comments(slice.rendered_text));
    std::size_t width = 0;
    for (const auto& line : code) width = std::max(width, line.size());
    const std::size_t column = width + 4;

    std::map<std::size_t, std::string> comments;  // rendered line index -> comment text
    for (int line : slice.retained) {
        if (!unit.executable_lines.count(line)) continue;
        const auto& stmt = unit.statements[static_cast<std::size_t>(unit.first_line_index.at(line))];
        auto mapped = slice.line_map.find(stmt.last_line);
        if (mapped == slice.line_map.end()) throw LineMismatch("line " + std::to_string(line) + " is not in the slice");
        std::string text;
        auto it = visits.find(line);
        if (it == visits.end()) {
            text = "not executed";
        } else {
            auto names = shown_names(stmt);
            text = describe(*it->second.front(), names);
            if (it->second.size() > 1) text += " | " + describe(*it->second.back(), names);
        }
        if (line == slice.target.line) text += " <-- target";
        comments[static_cast<std::size_t>(mapped->second - 1)] = text;
    }

    std::string out;
    for (std::size_t i = 0; i < code.size(); ++i) {
        std::string line = code[i];
        auto c = comments.find(i);
        if (c != comments.end()) {
            line.append(column - line.size(), ' ');
            line += "# " + c->second;
        }
        out += line + "\n";
    }
    return out;
}

}  // namespace weaver
