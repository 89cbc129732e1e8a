// Command-line front end: slicing, retrieval and annotation utilities, the
// generation run, and reports over a run's output directory.

#include "weaver/config.hpp"
#include "weaver/error.hpp"
#include "weaver/executor.hpp"
#include "weaver/inliner.hpp"
#include "weaver/llm.hpp"
#include "weaver/orchestrator.hpp"
#include "weaver/prompting.hpp"
#include "weaver/report.hpp"
#include "weaver/retrieval.hpp"
#include "weaver/slicer.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace fs = std::filesystem;
using namespace weaver;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 3, kEndpoint = 4, kShim = 5 };

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Subject load_file(const std::string& file) { return load_subject(file, fs::path(file).filename().string()); }

/// Tests with recorded traces, from a run's output directory (suite.json
/// plus traces/) or from a directory of trace documents.
TestSuite load_suite(const fs::path& dir, const Subject& subject) {
    std::vector<Subject> subjects{subject};
    TestSuite suite(universe_of(subjects));
    auto add = [&](const std::string& id, const fs::path& trace_file) {
        TestCase t;
        t.id = id;
        t.trace = std::make_shared<ExecutionTrace>(parse_trace(read_text(trace_file)));
        t.coverage = coverage_of(*t.trace, subjects, suite.coverage().universe);
        suite.add(std::move(t));
    };
    if (fs::exists(dir / "suite.json")) {
        Json index = Json::parse(read_text(dir / "suite.json"));
        for (const auto& entry : index.at("tests")) {
            if (entry.at("status") != "valid") continue;
            auto id = entry.at("id").get<std::string>();
            add(id, dir / "traces" / (id + ".json"));
        }
        return suite;
    }
    if (!fs::is_directory(dir)) throw IoError("not a suite directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) add(f.stem().string(), f);
    return suite;
}

std::unique_ptr<TestExecutor> make_executor(const RunConfig& config) {
    if (config.executor.kind == "fixtures") {
        return std::make_unique<FixtureExecutor>(config.executor.fixture_dir, config.test_prefix);
    }
    return std::make_unique<ShimExecutor>(config.executor.shim, config.root, config.out_dir / "work",
                                          config.test_timeout_s);
}

std::size_t persisted_prompt_count(const fs::path& out_dir) {
    if (!fs::exists(out_dir / "runlog.json")) return 0;
    return runlog_from_json(Json::parse(read_text(out_dir / "runlog.json"))).records.size();
}

int cmd_run(const std::string& config_path, const std::string& transcript, const std::string& resume_dir,
            const std::string& out_override, const std::string& prompt_dir) {
    if (!fs::is_regular_file(config_path)) throw ConfigError("no configuration file at " + config_path);
    RunConfig config = load_config(config_path);
    if (!out_override.empty()) config.out_dir = out_override;
    if (!resume_dir.empty()) config.out_dir = resume_dir;
    if (!prompt_dir.empty()) config.prompt_dir = prompt_dir;
    auto prompts = PromptLibrary::load(config.prompt_dir.empty() ? PromptLibrary::default_dir() : config.prompt_dir);
    Project project = load_project(config);
    auto executor = make_executor(config);

    std::unique_ptr<LlmClient> llm;
    std::unique_ptr<Clock> clock;
    if (!transcript.empty()) {
        // Replayed responses: the run is timed by a clock that never moves so
        // repeated runs produce identical logs.
        std::size_t start = resume_dir.empty() ? 0 : persisted_prompt_count(resume_dir);
        llm = std::make_unique<ScriptedLlmClient>(config.llm, ScriptedLlmClient::load_transcript(transcript), start);
        clock = std::make_unique<ManualClock>();
    } else {
        llm = std::make_unique<HttpLlmClient>(config.llm);
        clock = std::make_unique<SystemClock>();
    }

    Orchestrator orchestrator(config, std::move(project), *llm, *executor, *clock, std::move(prompts));
    if (!resume_dir.empty()) orchestrator.resume(resume_dir);
    const RunLog& log = orchestrator.run();
    auto m = (log.records.empty() ? log.initial : log.records.back().coverage).metrics();
    auto fmt = [](const std::optional<double>& v) {
        std::ostringstream ss;
        if (v) ss << std::fixed << std::setprecision(2) << *v << "%";
        else ss << "n/a";
        return ss.str();
    };
    std::cout << "stop reason: " << log.stop_reason << "\n"
              << "prompts: " << log.records.size() << "\n"
              << "tests: " << orchestrator.suite().size() << "\n"
              << "line coverage: " << fmt(m.line_pct) << "\n"
              << "branch coverage: " << fmt(m.branch_pct) << "\n"
              << "output: " << config.out_dir.string() << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coverage-guided regression test generation for Python projects"};
    app.require_subcommand(1);
    std::string prompt_dir;
    app.add_option("--prompt-dir", prompt_dir, "Directory with prompt templates (overrides the configuration)");

    std::string file, suite_dir, test_id;
    int line = 0;
    bool annotate = false;

    auto* slice = app.add_subcommand("slice", "Print the backward slice of a line");
    slice->add_option("file", file, "Python source file")->required();
    slice->add_option("--line", line, "Target line")->required();
    slice->add_flag("--annotate", annotate, "Suffix kept lines with their original line numbers");

    auto* closest = app.add_subcommand("closest", "Find the recorded test closest to reaching a line");
    closest->add_option("file", file, "Python source file")->required();
    closest->add_option("--line", line, "Target line")->required();
    closest->add_option("--suite", suite_dir, "Run output directory or directory of traces")->required();

    auto* inl = app.add_subcommand("inline", "Annotate a line's slice with a test's execution values");
    inl->add_option("file", file, "Python source file")->required();
    inl->add_option("--line", line, "Target line")->required();
    inl->add_option("--test", test_id, "Test id")->required();
    inl->add_option("--suite", suite_dir, "Run output directory or directory of traces")->required();

    std::string config_path, transcript, resume_dir, run_out;
    auto* run = app.add_subcommand("run", "Generate tests for a project");
    run->add_option("--config", config_path, "Configuration file")->required();
    run->add_option("--mock-transcript", transcript, "Replay model responses from a JSON array of strings");
    run->add_option("--resume", resume_dir, "Continue the run persisted in this output directory");
    run->add_option("--out", run_out, "Output directory (overrides the configuration)");

    std::string out_dir, format = "text", strata;
    auto* report = app.add_subcommand("report", "Summarize a run");
    report->add_option("out-dir", out_dir, "Run output directory")->required();
    report->add_option("--format", format, "json, csv or text")->check(CLI::IsMember({"json", "csv", "text"}));
    report->add_option("--strata", strata, "Stratify coverage by loc or cc")->check(CLI::IsMember({"loc", "cc"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*slice) {
            Subject s = load_file(file);
            std::cout << backward_slice(s.unit, s.cfg, s.cdg, line, RenderOptions{annotate}).rendered_text;
        } else if (*closest) {
            Subject s = load_file(file);
            TestSuite suite = load_suite(suite_dir, s);
            auto found = find_closest_test(suite, s.unit.line_id(line), s);
            if (!found) {
                std::cout << "none\n";
                return kFailure;
            }
            std::cout << found->test->id << " " << found->distance << "\n";
        } else if (*inl) {
            Subject s = load_file(file);
            TestSuite suite = load_suite(suite_dir, s);
            const TestCase* t = suite.find(test_id);
            if (t == nullptr) throw Error("no recorded trace for test " + test_id);
            Slice sl = backward_slice(s.unit, s.cfg, s.cdg, line);
            std::cout << annotate_slice(sl, s.unit, *t->trace);
        } else if (*run) {
            return cmd_run(config_path, transcript, resume_dir, run_out, prompt_dir);
        } else if (*report) {
            auto input = load_report_input(out_dir);
            std::optional<Strata> st;
            if (!strata.empty()) st = strata_from_name(strata);
            std::cout << emit(input, report_format_from_name(format), st);
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfig;
    } catch (const BudgetExhausted& e) {
        std::cerr << "token budget exhausted: " << e.what() << "\n";
        return kOk;
    } catch (const TransportError& e) {
        std::cerr << "model endpoint unreachable: " << e.what() << "\n";
        return kEndpoint;
    } catch (const EndpointError& e) {
        std::cerr << "model endpoint error: " << e.what() << "\n";
        return kEndpoint;
    } catch (const ShimUnavailable& e) {
        std::cerr << "tracer unavailable: " << e.what() << "\n";
        return kShim;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kOk;
}
