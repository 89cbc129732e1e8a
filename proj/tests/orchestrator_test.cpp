#include "run_support.hpp"

#include "weaver/error.hpp"

#include <gtest/gtest.h>

#include <chrono>

using namespace weaver;
namespace wt = weaver::testing;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir(const std::string& name) {
    fs::path p = fs::path(WEAVER_TEST_TMP) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int records_for(const RunLog& log, Phase phase, int line) {
    int n = 0;
    for (const auto& r : log.records) {
        if (r.phase == phase && r.target && r.target->line == line) ++n;
    }
    return n;
}

// A small subject with one branch, traced synthetically.
const char* kBranchy = "def f(x):\n    if x > 0:\n        return 1\n    return 2\n";

ExecutionTrace synthetic_trace(const std::string& id, std::initializer_list<int> lines,
                               OutcomeStatus status = OutcomeStatus::Passed, const std::string& message = "") {
    ExecutionTrace t;
    t.test_id = id;
    int k = 0;
    for (int l : lines) {
        t.events.push_back(TraceEvent{++k, LineId{"branchy.py", l}, {}});
        t.executed_lines.insert(LineId{"branchy.py", l});
    }
    t.outcome = Outcome{status, message};
    return t;
}

struct BranchyRun {
    fs::path root;
    RunConfig config;
    ScriptedLlmClient llm;
    wt::CallbackExecutor executor;
    ManualClock clock;
    Orchestrator orchestrator;

    BranchyRun(const std::string& name, std::vector<std::string> transcript, wt::CallbackExecutor::Fn fn,
               std::function<void(RunConfig&)> tweak = {})
        : root(tmp_dir(name)),
          config(make_config(root, tweak)),
          llm(config.llm, std::move(transcript)),
          executor(std::move(fn)),
          orchestrator(config, load_project(config), llm, executor, clock,
                       PromptLibrary::load(PromptLibrary::default_dir())) {}

    static RunConfig make_config(const fs::path& root, const std::function<void(RunConfig&)>& tweak) {
        std::ofstream(root / "branchy.py") << kBranchy;
        RunConfig c;
        c.root = root;
        c.files = {"branchy.py"};
        c.out_dir = root / "out";
        c.seed_count = 0;
        if (tweak) tweak(c);
        return c;
    }
};

// Passing trace chosen by the value the test passes: "f(1)" or "f(-1)".
ExecutionTrace by_argument(const std::string& id, const std::string& source, const Subject&) {
    if (source.find("f(1)") != std::string::npos) return synthetic_trace(id, {2, 3});
    if (source.find("f(-1)") != std::string::npos) return synthetic_trace(id, {2, 4});
    if (source.find("boom") != std::string::npos) {
        return synthetic_trace(id, {}, OutcomeStatus::Error, "NameError: name 'boom' is not defined");
    }
    if (source.find("sleep") != std::string::npos) return synthetic_trace(id, {2}, OutcomeStatus::Timeout);
    return synthetic_trace(id, {});
}

}  // namespace

TEST(EndToEnd, Fig1ScriptedRunReachesFullLineCoverage) {
    auto started = std::chrono::steady_clock::now();
    wt::Fig1Run run(tmp_dir("e2e_a"));
    const auto& log = run.orchestrator.run();
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    EXPECT_LT(seconds, 10.0);

    EXPECT_EQ(log.stop_reason, "completed");
    EXPECT_EQ(log.records.size(), 9u);
    ASSERT_TRUE(log.records.back().coverage.metrics().line_pct.has_value());
    EXPECT_DOUBLE_EQ(*log.records.back().coverage.metrics().line_pct, 100.0);
    EXPECT_TRUE(log.unachieved.empty());

    // Three phase snapshots, strictly increasing.
    ASSERT_EQ(log.phases.size(), 3u);
    EXPECT_EQ(log.phases[0].phase, Phase::Seed);
    EXPECT_EQ(log.phases[1].phase, Phase::Generation);
    EXPECT_EQ(log.phases[2].phase, Phase::Regeneration);
    EXPECT_EQ(log.phases[0].coverage.covered_lines, 22);
    EXPECT_EQ(log.phases[1].coverage.covered_lines, 24);
    EXPECT_EQ(log.phases[2].coverage.covered_lines, 25);

    // Budgets and the incidental coverage of line 22.
    EXPECT_EQ(records_for(log, Phase::Generation, 21), 1);
    EXPECT_EQ(records_for(log, Phase::Generation, 22), 0);
    EXPECT_EQ(records_for(log, Phase::Generation, 27), 6);
    EXPECT_EQ(records_for(log, Phase::Regeneration, 27), 1);

    std::vector<PromptResult> results;
    for (const auto& r : log.records) results.push_back(r.result);
    using R = PromptResult;
    EXPECT_EQ(results, (std::vector<R>{R::NewCoverage, R::CoveredTarget, R::NoProgress, R::Invalid, R::Invalid,
                                       R::Invalid, R::Invalid, R::Invalid, R::CoveredTarget}));
    const auto& regen = log.records.back();
    EXPECT_EQ(regen.template_name, "regeneration");
    EXPECT_EQ(regen.note, "closest test test_weaver_seed_four_elements at distance 1");
    EXPECT_NE(regen.messages[0].content.find("freq = {5: 3, 2: 1}"), std::string::npos);

    // Series never decreases.
    auto series = log.series();
    for (std::size_t i = 1; i < series.size(); ++i) EXPECT_TRUE(at_most(series[i - 1], series[i])) << i;

    EXPECT_EQ(run.orchestrator.suite().size(), 5u);
    std::int64_t in = 0, out = 0;
    for (const auto& r : log.records) {
        in += r.tokens_in;
        out += r.tokens_out;
    }
    EXPECT_EQ(log.tokens_in, in);
    EXPECT_EQ(log.tokens_out, out);
    EXPECT_EQ(run.llm.budget().used(), in + out);
    EXPECT_DOUBLE_EQ(log.cost, cost(in, out, run.config.llm));
}

TEST(EndToEnd, Fig1RunIsDeterministicAndResumable) {
    auto a_dir = tmp_dir("e2e_det_a"), b_dir = tmp_dir("e2e_det_b");
    wt::Fig1Run a(a_dir), b(b_dir);
    a.orchestrator.run();
    b.orchestrator.run();
    EXPECT_EQ(wt::read_file((a_dir / "runlog.json").string()), wt::read_file((b_dir / "runlog.json").string()));
    EXPECT_EQ(wt::read_file((a_dir / "coverage.json").string()), wt::read_file((b_dir / "coverage.json").string()));
    for (const auto& t : a.orchestrator.suite().tests()) {
        EXPECT_EQ(wt::read_file((a_dir / "tests" / (t.id + ".py")).string()), t.source);
    }

    // A finished run resumes without further prompts.
    auto cfg = wt::fig1_run_config(a_dir);
    ScriptedLlmClient llm(cfg.llm, wt::fig1_transcript(), a.orchestrator.log().records.size());
    FixtureExecutor exec(cfg.executor.fixture_dir, cfg.test_prefix);
    ManualClock clock;
    Orchestrator resumed(cfg, load_project(cfg), llm, exec, clock, PromptLibrary::load(PromptLibrary::default_dir()));
    resumed.resume(a_dir);
    EXPECT_EQ(resumed.suite().coverage(), a.orchestrator.suite().coverage());
    resumed.run();
    EXPECT_EQ(llm.calls(), 0);
    EXPECT_EQ(resumed.log(), a.orchestrator.log());
}

TEST(EndToEnd, TokenBudgetStopIsCleanAndResumable) {
    auto dir = tmp_dir("e2e_budget");
    auto cfg = wt::fig1_run_config(dir);
    cfg.llm.token_budget = 1200;  // enough for the seed and a few prompts
    ScriptedLlmClient llm(cfg.llm, wt::fig1_transcript());
    FixtureExecutor exec(cfg.executor.fixture_dir, cfg.test_prefix);
    ManualClock clock;
    Orchestrator o(cfg, load_project(cfg), llm, exec, clock, PromptLibrary::load(PromptLibrary::default_dir()));
    const auto& log = o.run();
    EXPECT_EQ(log.stop_reason, "token_budget");
    ASSERT_FALSE(log.records.empty());
    EXPECT_LT(log.records.size(), 9u);
    ASSERT_FALSE(log.phases.empty());
    EXPECT_FALSE(log.phases.back().complete);

    // Resume with a fresh budget finishes the same way the uninterrupted run does.
    auto cfg2 = wt::fig1_run_config(dir);
    ScriptedLlmClient llm2(cfg2.llm, wt::fig1_transcript(), log.records.size());
    Orchestrator again(cfg2, load_project(cfg2), llm2, exec, clock, PromptLibrary::load(PromptLibrary::default_dir()));
    again.resume(dir);
    const auto& full = again.run();
    EXPECT_EQ(full.stop_reason, "completed");
    EXPECT_EQ(full.records.size(), 9u);
    EXPECT_EQ(full.phases.size(), 3u);
    EXPECT_EQ(records_for(full, Phase::Generation, 27), 6);
    EXPECT_EQ(full.records.back().coverage.covered_lines, 25);
}

TEST(Orchestrator, RepairFixesNameErrorOnFirstAttempt) {
    BranchyRun run("repair_ok",
                   {wt::test_response("test_weaver_a", "    assert boom(1) == 1\n"),
                    wt::test_response("test_weaver_a", "    assert f(1) == 1\n"),
                    wt::test_response("test_weaver_b", "    assert f(-1) == 2\n")},
                   by_argument, [](RunConfig& c) { c.regen_retries_per_line = 0; });
    const auto& log = run.orchestrator.run();
    ASSERT_EQ(log.records.size(), 3u);
    EXPECT_EQ(log.records[0].phase, Phase::Generation);
    EXPECT_EQ(log.records[0].result, PromptResult::Invalid);
    EXPECT_EQ(log.records[1].phase, Phase::Repair);
    EXPECT_EQ(log.records[1].result, PromptResult::CoveredTarget);
    EXPECT_NE(log.records[1].messages[0].content.find("NameError: name 'boom' is not defined"), std::string::npos);
    EXPECT_EQ(log.records[2].target->line, 4);
    EXPECT_EQ(run.orchestrator.suite().tests()[0].status, TestStatus::Valid);
    EXPECT_DOUBLE_EQ(*log.records.back().coverage.metrics().line_pct, 100.0);
}

TEST(Orchestrator, RepeatedRepairFailureDropsTheTest) {
    BranchyRun run("repair_drop",
                   {wt::test_response("test_weaver_a", "    assert boom(1)\n"),
                    wt::test_response("test_weaver_a", "    assert boom(2)\n"), "still broken, sorry"},
                   by_argument, [](RunConfig& c) {
                       c.gen_retries_per_line = 1;
                       c.regen_retries_per_line = 0;
                   });
    EXPECT_THROW(run.orchestrator.run(), EndpointError);  // transcript ends while targeting line 4
    const auto& log = run.orchestrator.log();
    ASSERT_GE(log.records.size(), 3u);
    EXPECT_EQ(log.records[1].phase, Phase::Repair);
    EXPECT_EQ(log.records[2].phase, Phase::Repair);
    ASSERT_EQ(run.orchestrator.suite().size(), 1u);
    EXPECT_EQ(run.orchestrator.suite().tests()[0].status, TestStatus::Dropped);
    EXPECT_EQ(run.orchestrator.suite().coverage().covered_lines.size(), 0u);
    // State reached before the failure is persisted.
    EXPECT_TRUE(fs::exists(run.config.out_dir / "runlog.json"));
    EXPECT_TRUE(fs::exists(run.config.out_dir / "tests" / "test_weaver_a.py"));
}

TEST(Orchestrator, TimeoutIsDroppedWithoutRepair) {
    BranchyRun run("timeout", {wt::test_response("test_weaver_slow", "    sleep()\n")}, by_argument,
                   [](RunConfig& c) {
                       c.gen_retries_per_line = 1;
                       c.regen_retries_per_line = 0;
                   });
    EXPECT_THROW(run.orchestrator.run(), EndpointError);
    // No repair prompt follows the timed-out test.
    const auto& log = run.orchestrator.log();
    ASSERT_EQ(log.records.size(), 1u);
    EXPECT_EQ(log.records[0].result, PromptResult::Invalid);
    EXPECT_EQ(run.orchestrator.suite().tests()[0].status, TestStatus::Dropped);
}

TEST(Orchestrator, SeedPhaseAddsValidTests) {
    std::string seeds = "```python\n";
    for (int i = 0; i < 12; ++i) seeds += "def test_weaver_s" + std::to_string(i) + "():\n    assert f(1) == 1\n\n";
    seeds += "```\n";
    BranchyRun run("seed10", {seeds, wt::test_response("test_weaver_neg", "    assert f(-1) == 2\n")}, by_argument,
                   [](RunConfig& c) { c.seed_count = 10; });
    const auto& log = run.orchestrator.run();
    EXPECT_EQ(log.records[0].phase, Phase::Seed);
    EXPECT_EQ(log.records[0].test_ids.size(), 10u);
    EXPECT_EQ(log.records[0].result, PromptResult::NewCoverage);
    EXPECT_EQ(run.orchestrator.suite().size(), 11u);
    EXPECT_EQ(log.records.size(), 2u);
}

TEST(Orchestrator, SeedWithoutTestsContinuesToGeneration) {
    BranchyRun run("seed0", {"no tests here", wt::test_response("test_weaver_p", "    assert f(1) == 1\n"),
                             wt::test_response("test_weaver_n", "    assert f(-1) == 2\n")},
                   by_argument, [](RunConfig& c) { c.seed_count = 10; });
    const auto& log = run.orchestrator.run();
    EXPECT_EQ(log.records[0].result, PromptResult::Invalid);
    EXPECT_EQ(log.phases[0].coverage.covered_lines, 0);
    EXPECT_EQ(log.records.size(), 3u);
    EXPECT_EQ(log.stop_reason, "completed");
}

TEST(Orchestrator, RegenerationFallsBackWithoutClosestTest) {
    BranchyRun run("fallback", {"nothing", wt::test_response("test_weaver_p", "    assert f(1) == 1\n")}, by_argument,
                   [](RunConfig& c) {
                       c.gen_retries_per_line = 0;
                       c.regen_retries_per_line = 1;
                   });
    EXPECT_THROW(run.orchestrator.run(), EndpointError);  // line 4's regeneration exhausts the transcript
    const auto& log = run.orchestrator.log();
    EXPECT_EQ(log.records[0].phase, Phase::Regeneration);
    EXPECT_EQ(log.records[0].template_name, "generation");
    EXPECT_EQ(log.records[0].note, "no closest test; generation template used");
}

TEST(Orchestrator, SaturationStopEndsLineEarly) {
    std::vector<std::string> prose(20, "no idea");
    BranchyRun run("saturation", prose, by_argument, [](RunConfig& c) {
        c.saturation_stop = true;
        c.regen_retries_per_line = 0;
    });
    const auto& log = run.orchestrator.run();
    EXPECT_EQ(records_for(log, Phase::Generation, 2), 2);
    EXPECT_EQ(records_for(log, Phase::Generation, 3), 2);
    EXPECT_EQ(records_for(log, Phase::Generation, 4), 2);
    EXPECT_EQ(log.unachieved.size(), 3u);
}

TEST(Orchestrator, WallClockStop) {
    ManualClock* clock_ptr = nullptr;
    BranchyRun run("wallclock", std::vector<std::string>(20, "no idea"),
                   [&](const std::string& id, const std::string& s, const Subject& subj) {
                       return by_argument(id, s, subj);
                   },
                   [](RunConfig& c) { c.wall_clock_budget_s = 5; });
    clock_ptr = &run.clock;
    // Each prompt costs two seconds of wall time.
    struct Ticking : ScriptedLlmClient {
        ManualClock& clock;
        Ticking(LlmConfig c, ManualClock& k) : ScriptedLlmClient(c, std::vector<std::string>(20, "no idea")), clock(k) {}
        Completion send(const Messages& m) override {
            clock.advance(2);
            return ScriptedLlmClient::send(m);
        }
    } ticking(run.config.llm, *clock_ptr);
    Orchestrator o(run.config, load_project(run.config), ticking, run.executor, run.clock,
                   PromptLibrary::load(PromptLibrary::default_dir()));
    const auto& log = o.run();
    EXPECT_EQ(log.stop_reason, "wall_clock");
    EXPECT_EQ(log.records.size(), 3u);
    EXPECT_DOUBLE_EQ(log.elapsed_s, 6.0);
    EXPECT_NO_THROW(runlog_from_json(Json::parse(wt::read_file((run.config.out_dir / "runlog.json").string()))));
}

TEST(Saturation, Examples) {
    RunLog log;
    EXPECT_FALSE(saturation_check(log));
    PromptRecord p, n;
    p.result = PromptResult::NewCoverage;
    n.result = PromptResult::NoProgress;
    log.records = {n, n};
    EXPECT_TRUE(saturation_check(log));
    log.records = {p, n};
    EXPECT_FALSE(saturation_check(log));
    log.records = {n};
    EXPECT_FALSE(saturation_check(log));
}

TEST(RunLog, JsonRoundTrip) {
    wt::Fig1Run run(tmp_dir("e2e_json"));
    const auto& log = run.orchestrator.run();
    auto doc = runlog_to_json(log);
    EXPECT_EQ(runlog_from_json(Json::parse(doc.dump())), log);
    EXPECT_THROW(runlog_from_json(Json::parse("{\"v\": 1}")), IoError);
}
