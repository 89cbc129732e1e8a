#pragma once

#include "weaver/subject.hpp"
#include "weaver/trace.hpp"

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace weaver {

enum class TestStatus { Valid, Dropped };

struct TestCase {
    std::string id;
    std::string source;
    TestStatus status = TestStatus::Valid;
    std::shared_ptr<const ExecutionTrace> trace;  // null for dropped tests
    CoverageMap coverage;                         // this test's contribution
};

/// Tests in insertion order together with their merged coverage.
class TestSuite {
public:
    TestSuite() = default;
    explicit TestSuite(CoverageUniverse universe);

    /// Appends a test. Throws Error on a duplicate id, and UniverseMismatch
    /// when a valid test's coverage is over a different universe.
    void add(TestCase test);

    const std::vector<TestCase>& tests() const { return tests_; }
    const CoverageMap& coverage() const { return coverage_; }
    const TestCase* find(const std::string& id) const;
    std::size_t size() const { return tests_.size(); }
    bool empty() const { return tests_.empty(); }

private:
    std::vector<TestCase> tests_;
    CoverageMap coverage_;
};

/// Exec(T) restricted to one file.
std::set<int> executed_lines_in(const ExecutionTrace& trace, const std::string& file);

/// Distance of the first condition of `cond` (proximity-ordered) that
/// `exec` covers; None when none is covered.
std::optional<int> closeness(const std::vector<Control>& cond, const std::set<int>& exec, int target);

/// Closeness of a test's execution to `target` in `subject`.
std::optional<int> closeness(const TestCase& test, const LineId& target, const Subject& subject);

struct ClosestMatch {
    std::size_t index = 0;  // position in the candidate list
    int distance = 0;
};

/// The candidate whose first covered condition is nearest `target`; ties go
/// to the earliest candidate.
std::optional<ClosestMatch> find_closest(const std::vector<Control>& cond, int target,
                                         const std::vector<std::set<int>>& execs);

struct ClosestTest {
    const TestCase* test = nullptr;
    int distance = 0;
};

/// Selects the valid suite member whose execution reaches nearest to the
/// target's governing conditions. Throws UnknownLine for a non-executable
/// target.
std::optional<ClosestTest> find_closest_test(const TestSuite& suite, const LineId& target, const Subject& subject);

}  // namespace weaver
