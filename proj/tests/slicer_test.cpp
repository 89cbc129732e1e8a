#include "fixtures.hpp"
#include "slice_oracles.hpp"
#include "structured_program.hpp"

#include "weaver/error.hpp"
#include "weaver/slicer.hpp"

#include <gtest/gtest.h>

#include <deque>
#include <functional>

using namespace weaver;
namespace wt = weaver::testing;

namespace {

struct Fig1Slice : ::testing::Test {
    SourceUnit unit = parse_unit(wt::fig1_text(), "evaluate.py");
    Cfg cfg = build_cfg(unit);
    Cdg cdg = build_cdg(cfg);
};

}  // namespace

TEST_F(Fig1Slice, Phase1MatchesPathEnumeration) {
    std::set<int> expected{1, 2, 3, 4, 6, 7, 8, 9, 16, 23, 24, 26, 27};
    EXPECT_EQ(wt::oracle_phase1(27), expected);
    EXPECT_EQ(reachable_prefix_filter(unit, cfg, 27), expected);
    EXPECT_EQ(reachable_prefix_filter(unit, cfg, 2), (std::set<int>{1, 2}));
    for (int line : unit.executable_lines) {
        EXPECT_EQ(reachable_prefix_filter(unit, cfg, line), wt::oracle_phase1(line)) << "target " << line;
    }
}

TEST_F(Fig1Slice, Phase2MatchesNaiveWorklist) {
    auto p1 = reachable_prefix_filter(unit, cfg, 27);
    std::set<int> expected{1, 2, 3, 6, 7, 8, 9, 16, 23, 24, 26, 27};
    EXPECT_EQ(wt::oracle_closure(27, wt::oracle_phase1(27)), expected);
    EXPECT_EQ(dependency_closure(unit, cfg, cdg, 27, p1), expected);

    EXPECT_EQ(wt::oracle_closure(8, wt::oracle_phase1(8)), (std::set<int>{1, 2, 6, 8}));
    EXPECT_EQ(dependency_closure(unit, cfg, cdg, 8, reachable_prefix_filter(unit, cfg, 8)), (std::set<int>{1, 2, 6, 8}));

    for (int line : unit.executable_lines) {
        auto candidates = reachable_prefix_filter(unit, cfg, line);
        auto closure = dependency_closure(unit, cfg, cdg, line, candidates);
        EXPECT_EQ(closure, wt::oracle_closure(line, wt::oracle_phase1(line))) << "target " << line;
        for (int l : closure) EXPECT_TRUE(candidates.count(l)) << "monotonicity, target " << line;
    }
}

TEST_F(Fig1Slice, RenderedSlice) {
    auto slice = backward_slice(unit, cfg, cdg, 27);
    const char* expected =
        "def evaluate_sequence(arr: list[int]):\n"
        "    score = 0\n"
        "    freq = {}\n"
        "    for x in arr:\n"
        "        freq[x] = freq.get(x, 0) + 1\n"
        "        score += x\n"
        "    if len(arr) < 4:\n"
        "        pass\n"
        "    elif score % 5 == 0:\n"
        "        pass\n"
        "    else:\n"
        "        if arr == sorted(arr):\n"
        "            pass\n"
        "        elif all(v < 3 for v in freq.values()):\n"
        "            score -= 1  # <-- target\n";
    EXPECT_EQ(slice.rendered_text, expected);
    EXPECT_EQ(slice.line_map.at(27), 15);
    EXPECT_EQ(slice.line_map.at(1), 1);
    EXPECT_EQ(slice.line_map.count(4), 0u);
    EXPECT_DOUBLE_EQ(slice.reduction_ratio, 15.0 / 25.0);
    EXPECT_NO_THROW(parse_unit(slice.rendered_text, "slice.py"));
}

TEST_F(Fig1Slice, AnnotatedRendering) {
    auto slice = backward_slice(unit, cfg, cdg, 8, RenderOptions{true});
    EXPECT_EQ(slice.rendered_text,
              "def evaluate_sequence(arr: list[int]):  # line 1\n"
              "    score = 0  # line 2\n"
              "    for x in arr:  # line 6\n"
              "        score += x  # line 8 <-- target\n");
}

TEST_F(Fig1Slice, UnknownTarget) {
    EXPECT_THROW(backward_slice(unit, cfg, cdg, 5), UnknownLine);
    EXPECT_THROW(reachable_prefix_filter(unit, cfg, 28), UnknownLine);
}

TEST_F(Fig1Slice, EveryLineReparses) {
    for (int line : unit.executable_lines) {
        auto slice = backward_slice(unit, cfg, cdg, line);
        EXPECT_TRUE(slice.retained.count(line));
        EXPECT_GE(slice.reduction_ratio, 0.0);
        EXPECT_LT(slice.reduction_ratio, 1.0);
        EXPECT_NO_THROW(parse_unit(slice.rendered_text, "slice.py")) << slice.rendered_text;
    }
}

TEST(Slicer, SingleStatementModule) {
    auto unit = parse_unit("x = 1\n", "m.py");
    auto cfg = build_cfg(unit);
    auto slice = backward_slice(unit, cfg, build_cdg(cfg), 1);
    EXPECT_EQ(slice.rendered_text, "x = 1  # <-- target\n");
    EXPECT_DOUBLE_EQ(slice.reduction_ratio, 0.0);
}

TEST(Slicer, StraightLineModuleKeepsEverything) {
    auto unit = parse_unit("a = 1\nb = a + 1\nc = b * 2\n", "m.py");
    auto cfg = build_cfg(unit);
    EXPECT_EQ(reachable_prefix_filter(unit, cfg, 3), (std::set<int>{1, 2, 3}));
}

TEST(Slicer, ModuleSupportAndLoopJumps) {
    const char* text =
        "import math\n"
        "LIMIT = 10\n"
        "UNUSED = 3\n"
        "class Acc:\n"
        "    @staticmethod\n"
        "    def total(xs):\n"
        "        s = 0\n"
        "        n = 0\n"
        "        for x in xs:\n"
        "            n += 1\n"
        "            if x > LIMIT:\n"
        "                break\n"
        "            s += x\n"
        "        return s\n";
    auto unit = parse_unit(text, "acc.py");
    auto cfg = build_cfg(unit);
    auto slice = backward_slice(unit, cfg, build_cdg(cfg), 14);
    EXPECT_EQ(slice.rendered_text,
              "import math\n"
              "LIMIT = 10\n"
              "class Acc:\n"
              "    @staticmethod\n"
              "    def total(xs):\n"
              "        s = 0\n"
              "        for x in xs:\n"
              "            if x > LIMIT:\n"
              "                break\n"
              "            s += x\n"
              "        return s  # <-- target\n");
}

TEST(Slicer, EarlyReturnInsideKeptArm) {
    const char* text =
        "def f(a, b):\n"
        "    if a < 0:\n"
        "        b = 1\n"
        "        return b\n"
        "    c = b + 1\n"
        "    return c\n";
    auto unit = parse_unit(text, "f.py");
    auto cfg = build_cfg(unit);
    auto slice = backward_slice(unit, cfg, build_cdg(cfg), 5);
    EXPECT_EQ(slice.rendered_text,
              "def f(a, b):\n"
              "    if a < 0:\n"
              "        return b\n"
              "    c = b + 1  # <-- target\n");
}

TEST(Slicer, BatchMatchesSerial) {
    auto unit = parse_unit(wt::fig1_text(), "evaluate.py");
    auto cfg = build_cfg(unit);
    auto cdg = build_cdg(cfg);
    std::vector<int> targets(unit.executable_lines.begin(), unit.executable_lines.end());
    auto parallel = slice_lines(unit, cfg, cdg, targets);
    auto serial = slice_lines_serial(unit, cfg, cdg, targets);
    ASSERT_EQ(parallel.size(), serial.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        EXPECT_EQ(parallel[i].rendered_text, serial[i].rendered_text);
        EXPECT_EQ(parallel[i].retained, serial[i].retained);
    }
    EXPECT_THROW(slice_lines(unit, cfg, cdg, {27, 5}), UnknownLine);
}

TEST(SlicerProperty, RandomProgramsReparseAndStayMonotone) {
    for (unsigned seed = 1; seed <= 200; ++seed) {
        wt::Generator gen(seed);
        auto program = gen.program(6);
        wt::Renderer renderer;
        std::string text = renderer.render(program);
        SCOPED_TRACE(text);
        auto unit = parse_unit(text, "gen.py");
        auto cfg = build_cfg(unit);
        auto cdg = build_cdg(cfg);
        for (int line : unit.executable_lines) {
            auto candidates = reachable_prefix_filter(unit, cfg, line);
            auto slice = backward_slice(unit, cfg, cdg, line);
            ASSERT_TRUE(slice.retained.count(line));
            // Outside phase 1 only exit support may appear: early exits of a
            // kept arm, and lines nested in a retained loop that keep its
            // break/continue structure.
            for (int l : dependency_closure(unit, cfg, cdg, line, candidates)) {
                if (candidates.count(l)) continue;
                if (unit.statements[static_cast<std::size_t>(unit.first_line_index.at(l))].kind == StmtKind::Return) continue;
                bool in_retained_loop = false;
                for (int p = unit.statements[static_cast<std::size_t>(unit.first_line_index.at(l))].parent; p >= 0;
                     p = unit.statements[static_cast<std::size_t>(p)].parent) {
                    const auto& ps = unit.statements[static_cast<std::size_t>(p)];
                    if (ps.kind == StmtKind::While && candidates.count(ps.line)) in_retained_loop = true;
                }
                ASSERT_TRUE(in_retained_loop) << "line " << l << " target " << line;
            }
            ASSERT_NO_THROW(parse_unit(slice.rendered_text, "slice.py")) << slice.rendered_text;
        }
    }
}
