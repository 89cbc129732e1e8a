#pragma once

#include "weaver/config.hpp"
#include "weaver/executor.hpp"
#include "weaver/llm.hpp"
#include "weaver/prompting.hpp"
#include "weaver/retrieval.hpp"
#include "weaver/runlog.hpp"

#include <chrono>
#include <filesystem>
#include <optional>
#include <vector>

namespace weaver {

class Clock {
public:
    virtual ~Clock() = default;
    virtual double now_s() = 0;
};

class SystemClock : public Clock {
public:
    double now_s() override;
};

/// A clock that only moves when told to; runs timed by it are reproducible.
class ManualClock : public Clock {
public:
    explicit ManualClock(double start = 0.0) : now_(start) {}
    double now_s() override { return now_; }
    void advance(double seconds) { now_ += seconds; }

private:
    double now_;
};

/// The subjects of a project, keyed by their root-relative paths.
struct Project {
    std::filesystem::path root;
    std::vector<Subject> subjects;
    CoverageUniverse universe;
};

/// Parses every file the configuration selects. Throws IoError when
/// nothing matches, or the parser's errors.
Project load_project(const RunConfig& config);
Project load_project(const std::filesystem::path& root, const std::vector<std::string>& relative_paths);

/// Drives the seed, generation and regeneration phases over a project.
class Orchestrator {
public:
    Orchestrator(RunConfig config, Project project, LlmClient& llm, TestExecutor& executor, Clock& clock,
                 PromptLibrary prompts);

    /// Continues a persisted run: reloads its suite and log. Attempts
    /// already spent count against the per-line budgets.
    void resume(const std::filesystem::path& out_dir);

    /// Runs the remaining phases. Budget stops end the run cleanly; other
    /// errors propagate after the state reached so far is persisted.
    const RunLog& run();

    void seed_phase();
    void generation_phase();
    void regeneration_phase();

    /// Writes tests, traces, the suite index, coverage and the run log.
    void persist(const std::filesystem::path& out_dir) const;

    const TestSuite& suite() const { return suite_; }
    const RunLog& log() const { return log_; }
    const Project& project() const { return project_; }

private:
    struct Stop {
        std::string reason;
    };

    void run_phase(Phase phase, void (Orchestrator::*body)());
    void target_loop(Phase phase, int budget);
    void finish();
    void attempt_line(Phase phase, const Subject& subject, int line, const Slice& slice, const PromptContext& ctx);

    /// Sends a prompt and appends its record; returns the record index.
    std::size_t prompt(Phase phase, const std::optional<LineId>& target, const std::string& template_name,
                       const Messages& messages, std::string note = {});
    double elapsed() const;
    void check_clock();
    std::string unique_id(const std::string& base) const;
    /// Executes a candidate; adds it to the suite when it runs.
    bool execute(const std::string& source, const Subject& subject, ExecutionTrace& trace, std::string& id);
    /// Repairs a candidate that failed to run; false when it is dropped.
    bool repair(std::string source, ExecutionTrace trace, const Subject& subject, const PromptContext& ctx,
                const std::optional<LineId>& target);
    PromptResult classify(const CoverageSnapshot& before, const std::optional<LineId>& target) const;
    void add_dropped(const std::string& source);
    int attempts_spent(Phase phase, const LineId& line) const;

    RunConfig config_;
    Project project_;
    LlmClient& llm_;
    TestExecutor& executor_;
    Clock& clock_;
    PromptLibrary prompts_;
    TestSuite suite_;
    RunLog log_;
    double start_s_ = 0.0;
    double resumed_elapsed_s_ = 0.0;
};

}  // namespace weaver
