#include "weaver/retrieval.hpp"

#include "weaver/error.hpp"

#include <cstdlib>

namespace weaver {

TestSuite::TestSuite(CoverageUniverse universe) { coverage_.universe = std::move(universe); }

void TestSuite::add(TestCase test) {
    if (find(test.id) != nullptr) throw Error("duplicate test id: " + test.id);
    if (test.status == TestStatus::Valid) {
        if (test.coverage.universe.lines.empty() && test.coverage.universe.decisions.empty()) {
            test.coverage.universe = coverage_.universe;
        }
        coverage_ = merge({coverage_, test.coverage});
    }
    tests_.push_back(std::move(test));
}

const TestCase* TestSuite::find(const std::string& id) const {
    for (const auto& t : tests_) {
        if (t.id == id) return &t;
    }
    return nullptr;
}

std::set<int> executed_lines_in(const ExecutionTrace& trace, const std::string& file) {
    std::set<int> out;
    for (const auto& l : trace.executed_lines) {
        if (same_file(l.file, file)) out.insert(l.line);
    }
    return out;
}

std::optional<int> closeness(const std::vector<Control>& cond, const std::set<int>& exec, int target) {
    for (const auto& c : cond) {
        // Only the closest covered condition counts.
        if (exec.count(c.condition)) return std::abs(c.condition - target);
    }
    return std::nullopt;
}

std::optional<int> closeness(const TestCase& test, const LineId& target, const Subject& subject) {
    if (!test.trace) return std::nullopt;
    auto cond = control_conditions(subject.cdg, subject.unit, target.line);
    return closeness(cond, executed_lines_in(*test.trace, subject.unit.path), target.line);
}

std::optional<ClosestMatch> find_closest(const std::vector<Control>& cond, int target,
                                         const std::vector<std::set<int>>& execs) {
    std::optional<ClosestMatch> best;
    for (std::size_t i = 0; i < execs.size(); ++i) {
        auto d = closeness(cond, execs[i], target);
        if (d && (!best || *d < best->distance)) best = ClosestMatch{i, *d};
    }
    return best;
}

std::optional<ClosestTest> find_closest_test(const TestSuite& suite, const LineId& target, const Subject& subject) {
    auto cond = control_conditions(subject.cdg, subject.unit, target.line);
    std::vector<const TestCase*> members;
    std::vector<std::set<int>> execs;
    for (const auto& t : suite.tests()) {
        if (t.status != TestStatus::Valid || !t.trace) continue;
        members.push_back(&t);
        execs.push_back(executed_lines_in(*t.trace, subject.unit.path));
    }
    auto match = find_closest(cond, target.line, execs);
    if (!match) return std::nullopt;
    return ClosestTest{members[match->index], match->distance};
}

}  // namespace weaver
