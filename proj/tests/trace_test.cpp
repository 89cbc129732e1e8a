#include "fixtures.hpp"
#include "random_coverage.hpp"

#include "weaver/error.hpp"
#include "weaver/trace.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace weaver;
namespace wt = weaver::testing;

namespace {

ExecutionTrace load_trace(const std::string& rel) { return parse_trace(wt::read_file(wt::fixture_path(rel))); }

Subject fig1_subject() { return make_subject(wt::fig1_text(), "evaluate.py", "evaluate.py"); }

std::set<BranchOutcome> outcomes(std::initializer_list<std::pair<int, bool>> list) {
    std::set<BranchOutcome> out;
    for (auto [l, p] : list) out.insert(BranchOutcome{LineId{"evaluate.py", l}, p});
    return out;
}

ExecutionTrace synthetic(const std::string& file, std::initializer_list<int> lines) {
    ExecutionTrace t;
    int k = 0;
    for (int l : lines) {
        t.events.push_back(TraceEvent{++k, LineId{file, l}, {}});
        t.executed_lines.insert(LineId{file, l});
    }
    t.outcome.status = OutcomeStatus::Passed;
    return t;
}

std::string minimal_doc(const std::string& events, const std::string& status = "passed") {
    return R"({"v": 1, "test_id": "t", "outcome": {"status": ")" + status + R"(", "message": ""}, "events": )" + events + "}";
}

}  // namespace

TEST(ParseTrace, InlineFragmentBindings) {
    auto t = load_trace("inline/traces/test_fragment_small_sum.json");
    ASSERT_EQ(t.events.size(), 2u);
    std::map<std::string, std::string> first(t.events[0].bindings.begin(), t.events[0].bindings.end());
    EXPECT_EQ(first, (std::map<std::string, std::string>{{"a", "2"}, {"b", "3"}, {"x", "5"}}));
    EXPECT_EQ(t.events[1].step, 2);
    EXPECT_EQ(t.events[1].line.line, 2);
    EXPECT_EQ(t.outcome.status, OutcomeStatus::Passed);
    EXPECT_TRUE(t.outcome.ran());
}

TEST(ParseTrace, EmptyErrorTrace) {
    auto t = parse_trace(minimal_doc("[]", "error"));
    EXPECT_TRUE(t.executed_lines.empty());
    EXPECT_EQ(t.outcome.status, OutcomeStatus::Error);
    EXPECT_FALSE(t.outcome.ran());
}

TEST(ParseTrace, RejectsMalformedDocuments) {
    auto expect_error = [](const std::string& doc, const std::string& position) {
        try {
            parse_trace(doc);
            ADD_FAILURE() << "accepted: " << doc;
        } catch (const TraceFormatError& e) {
            EXPECT_EQ(e.position(), position) << e.what();
        }
    };
    expect_error(minimal_doc(R"([{"k": 2, "file": "a.py", "line": 1, "vars": {}}, {"k": 1, "file": "a.py", "line": 2, "vars": {}}])"),
                 "$.events[1].k");
    expect_error(R"({"test_id": "t", "outcome": {"status": "passed"}, "events": []})", "$");
    expect_error(R"({"v": 2, "test_id": "t", "outcome": {"status": "passed"}, "events": []})", "$.v");
    expect_error(minimal_doc("[]", "skipped"), "$.outcome.status");
    expect_error(minimal_doc(R"([{"k": 1, "file": "a.py", "line": 0, "vars": {}}])"), "$.events[0].line");
    expect_error(minimal_doc(R"([{"k": 1, "file": "a.py", "line": 3, "vars": {"a b": "1"}}])"), "$.events[0].vars");
    expect_error(minimal_doc(R"([{"k": 1, "file": "a.py", "line": 3, "vars": {"a": 1}}])"), "$.events[0].vars.a");
    expect_error(minimal_doc(R"([{"k": 1, "line": 3, "vars": {}}])"), "$.events[0]");
    EXPECT_THROW(parse_trace("{not json"), TraceFormatError);
}

TEST(ParseTrace, JsonRoundTrip) {
    auto t = load_trace("fig1/traces/test_weaver_seed_four_elements.json");
    auto again = parse_trace(trace_to_json(t));
    EXPECT_EQ(again.executed_lines, t.executed_lines);
    ASSERT_EQ(again.events.size(), t.events.size());
    EXPECT_EQ(again.events.back().bindings, t.events.back().bindings);
}

TEST(TruncateValue, SixtyCharactersAndEllipsis) {
    EXPECT_EQ(truncate_value("short"), "short");
    std::string long_value(75, 'x');
    EXPECT_EQ(truncate_value(long_value), std::string(60, 'x') + "…");
    EXPECT_EQ(truncate_value(std::string(60, 'y')), std::string(60, 'y'));
    // Multi-byte characters count once.
    std::string accented;
    for (int i = 0; i < 61; ++i) accented += "é";
    std::string expected;
    for (int i = 0; i < 60; ++i) expected += "é";
    EXPECT_EQ(truncate_value(accented), expected + "…");
}

TEST(BranchOutcomes, HandWalkedFig1Traces) {
    auto fig1 = fig1_subject();
    // arr=[1,2,3]: loop three times, 9 true, 10 false (odd head), 14 true (ends in 3).
    auto short_list = branch_outcomes(load_trace("fig1/traces/test_weaver_short_list.json"), fig1);
    EXPECT_EQ(short_list, outcomes({{6, true}, {6, false}, {9, true}, {10, false}, {14, true}}));
    EXPECT_TRUE(short_list.count(BranchOutcome{LineId{"evaluate.py", 9}, true}));

    auto four = branch_outcomes(load_trace("fig1/traces/test_weaver_seed_four_elements.json"), fig1);
    EXPECT_EQ(four, outcomes({{6, true}, {6, false}, {9, false}, {16, true}, {16, false}, {17, true}, {19, true},
                              {24, true}, {24, false}, {26, false}}));
}

TEST(BranchOutcomes, SyntheticSequences) {
    auto fig1 = fig1_subject();
    EXPECT_TRUE(branch_outcomes(synthetic("evaluate.py", {9}), fig1).empty());
    auto loop = branch_outcomes(synthetic("evaluate.py", {6, 7, 8, 6, 7, 8, 6, 9}), fig1);
    EXPECT_TRUE(loop.count(BranchOutcome{LineId{"evaluate.py", 6}, true}));
    EXPECT_TRUE(loop.count(BranchOutcome{LineId{"evaluate.py", 6}, false}));
    // Events from other files are ignored, and do not break adjacency.
    auto mixed = synthetic("evaluate.py", {9, 10});
    mixed.events.insert(mixed.events.begin() + 1, TraceEvent{2, LineId{"helper.py", 3}, {}});
    EXPECT_EQ(branch_outcomes(mixed, fig1), outcomes({{9, true}}));
}

TEST(BranchOutcomes, RegionExitInference) {
    auto s = make_subject("def g(xs):\n    total = 0\n    for v in xs:\n        total += v\n", "g.py", "g.py");
    auto once = branch_outcomes(synthetic("g.py", {2, 3, 4, 3}), s);
    EXPECT_EQ(once, (std::set<BranchOutcome>{{LineId{"g.py", 3}, true}, {LineId{"g.py", 3}, false}}));
    // Called twice: the loop exit is followed by a fresh entry.
    auto twice = branch_outcomes(synthetic("g.py", {2, 3, 2, 3, 4, 3}), s);
    EXPECT_EQ(twice, (std::set<BranchOutcome>{{LineId{"g.py", 3}, true}, {LineId{"g.py", 3}, false}}));
}

TEST(Coverage, Fig1SeedTraces) {
    std::vector<Subject> subjects;
    subjects.push_back(fig1_subject());
    auto u = universe_of(subjects);
    EXPECT_EQ(u.lines.size(), 25u);
    EXPECT_EQ(u.decisions.size(), 10u);
    auto a = coverage_of(load_trace("fig1/traces/test_weaver_seed_small_lists.json"), subjects, u);
    auto b = coverage_of(load_trace("fig1/traces/test_weaver_seed_four_elements.json"), subjects, u);
    auto m = merge({a, b});
    std::set<LineId> uncovered;
    for (const auto& l : u.lines) {
        if (!m.covered_lines.count(l)) uncovered.insert(l);
    }
    EXPECT_EQ(uncovered, (std::set<LineId>{{"evaluate.py", 21}, {"evaluate.py", 22}, {"evaluate.py", 27}}));
    auto metrics = coverage_metrics(m);
    EXPECT_DOUBLE_EQ(*metrics.line_pct, 100.0 * 22 / 25);
    EXPECT_EQ(coverage_from_json(coverage_to_json(m)), m);
}

TEST(Coverage, MetricExamples) {
    CoverageMap m;
    for (int i = 1; i <= 20; ++i) m.universe.lines.insert(LineId{"m.py", i});
    for (int i = 1; i <= 5; ++i) m.universe.decisions.insert(LineId{"m.py", i});
    for (int i = 1; i <= 10; ++i) m.covered_lines.insert(LineId{"m.py", i});
    m.covered_branches = {{LineId{"m.py", 1}, true}, {LineId{"m.py", 1}, false}, {LineId{"m.py", 2}, true},
                          {LineId{"m.py", 3}, false}};
    auto r = coverage_metrics(m);
    EXPECT_DOUBLE_EQ(*r.line_pct, 50.0);
    EXPECT_DOUBLE_EQ(*r.branch_pct, 40.0);
    EXPECT_NEAR(*r.combined_pct, 46.67, 0.005);

    CoverageMap none = m;
    none.covered_lines.clear();
    none.covered_branches.clear();
    auto z = coverage_metrics(none);
    EXPECT_EQ(*z.line_pct, 0.0);
    EXPECT_EQ(*z.branch_pct, 0.0);
    EXPECT_EQ(*z.combined_pct, 0.0);

    auto na = coverage_metrics(CoverageMap{});
    EXPECT_FALSE(na.line_pct.has_value());
    EXPECT_FALSE(na.combined_pct.has_value());
}

TEST(Coverage, FullCoverage) {
    CoverageMap m;
    for (int i = 1; i <= 4; ++i) {
        m.universe.lines.insert(LineId{"m.py", i});
        m.covered_lines.insert(LineId{"m.py", i});
    }
    m.universe.decisions.insert(LineId{"m.py", 2});
    m.covered_branches = {{LineId{"m.py", 2}, true}, {LineId{"m.py", 2}, false}};
    auto r = coverage_metrics(m);
    EXPECT_EQ(*r.line_pct, 100.0);
    EXPECT_EQ(*r.branch_pct, 100.0);
    EXPECT_EQ(*r.combined_pct, 100.0);
}

TEST(Coverage, MergeRejectsDifferentUniverses) {
    CoverageMap a, b;
    a.universe.lines.insert(LineId{"a.py", 1});
    b.universe.lines.insert(LineId{"b.py", 1});
    EXPECT_THROW(merge({a, b}), UniverseMismatch);
}


TEST(CoverageProperty, CombinedLiesBetweenLineAndBranch) {
    for (unsigned seed = 1; seed <= 1000; ++seed) {
        wt::RandomMaps gen(seed);
        auto r = coverage_metrics(gen.next());
        ASSERT_TRUE(r.combined_pct.has_value());
        if (!r.branch_pct) {
            EXPECT_DOUBLE_EQ(*r.combined_pct, *r.line_pct);
            continue;
        }
        double lo = std::min(*r.line_pct, *r.branch_pct), hi = std::max(*r.line_pct, *r.branch_pct);
        EXPECT_GE(*r.combined_pct, lo - 1e-9) << "seed " << seed;
        EXPECT_LE(*r.combined_pct, hi + 1e-9) << "seed " << seed;
    }
}

TEST(CoverageProperty, MergeAlgebra) {
    for (unsigned seed = 1; seed <= 1000; ++seed) {
        wt::RandomMaps gen(seed);
        auto a = gen.next(), b = gen.next(), c = gen.next();
        CoverageMap empty;
        empty.universe = gen.universe;
        EXPECT_EQ(merge({merge({a, b}), c}), merge({a, merge({b, c})}));
        EXPECT_EQ(merge({a, b}), merge({b, a}));
        EXPECT_EQ(merge({a, a}), a);
        EXPECT_EQ(merge({a, empty}), a);

        // Per-element union oracle.
        auto m = merge({a, b});
        for (const auto& l : gen.universe.lines) {
            bool in = a.covered_lines.count(l) || b.covered_lines.count(l);
            EXPECT_EQ(m.covered_lines.count(l) == 1, in);
        }
        for (const auto& d : gen.universe.decisions) {
            for (bool p : {true, false}) {
                BranchOutcome o{d, p};
                bool in = a.covered_branches.count(o) || b.covered_branches.count(o);
                EXPECT_EQ(m.covered_branches.count(o) == 1, in);
            }
        }
    }
}
