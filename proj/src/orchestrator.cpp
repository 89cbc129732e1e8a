#include "weaver/orchestrator.hpp"

#include "weaver/error.hpp"
#include "weaver/inliner.hpp"

#include <fstream>
#include <sstream>

namespace weaver {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

}  // namespace

double SystemClock::now_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

Project load_project(const RunConfig& config) {
    auto files = expand_globs(config.root, config.files);
    if (files.empty()) throw IoError("no subject files match under " + config.root.string());
    return load_project(config.root, files);
}

Project load_project(const fs::path& root, const std::vector<std::string>& relative_paths) {
    Project p;
    p.root = root;
    for (const auto& rel : relative_paths) p.subjects.push_back(make_subject(read_text(root / rel), rel, rel));
    p.universe = universe_of(p.subjects);
    return p;
}

Orchestrator::Orchestrator(RunConfig config, Project project, LlmClient& llm, TestExecutor& executor, Clock& clock,
                           PromptLibrary prompts)
    : config_(std::move(config)),
      project_(std::move(project)),
      llm_(llm),
      executor_(executor),
      clock_(clock),
      prompts_(std::move(prompts)),
      suite_(project_.universe) {
    validate(config_);
    log_.initial = snapshot_of(suite_.coverage());
    start_s_ = clock_.now_s();
}

void Orchestrator::resume(const fs::path& out_dir) {
    Json index;
    try {
        index = Json::parse(read_text(out_dir / "suite.json"));
        suite_ = TestSuite(project_.universe);
        for (const auto& entry : index.at("tests")) {
            TestCase t;
            t.id = entry.at("id").get<std::string>();
            t.source = read_text(out_dir / "tests" / (t.id + ".py"));
            t.status = entry.at("status").get<std::string>() == "valid" ? TestStatus::Valid : TestStatus::Dropped;
            if (t.status == TestStatus::Valid) {
                t.trace = std::make_shared<ExecutionTrace>(parse_trace(read_text(out_dir / "traces" / (t.id + ".json"))));
                t.coverage = coverage_of(*t.trace, project_.subjects, project_.universe);
            }
            suite_.add(std::move(t));
        }
        log_ = runlog_from_json(Json::parse(read_text(out_dir / "runlog.json")));
    } catch (const Json::exception& e) {
        throw IoError("cannot resume from " + out_dir.string() + ": " + e.what());
    }
    resumed_elapsed_s_ = log_.elapsed_s;
    log_.stop_reason = "completed";
    log_.unachieved.clear();
}

double Orchestrator::elapsed() const { return resumed_elapsed_s_ + (clock_.now_s() - start_s_); }

const RunLog& Orchestrator::run() {
    start_s_ = clock_.now_s();
    try {
        run_phase(Phase::Seed, &Orchestrator::seed_phase);
        run_phase(Phase::Generation, &Orchestrator::generation_phase);
        run_phase(Phase::Regeneration, &Orchestrator::regeneration_phase);
    } catch (const Stop& stop) {
        log_.stop_reason = stop.reason;
    } catch (...) {
        finish();
        persist(config_.out_dir);
        throw;
    }
    finish();
    persist(config_.out_dir);
    return log_;
}

void Orchestrator::finish() {
    log_.elapsed_s = elapsed();
    log_.tokens_in = 0;
    log_.tokens_out = 0;
    for (const auto& r : log_.records) {
        log_.tokens_in += r.tokens_in;
        log_.tokens_out += r.tokens_out;
    }
    log_.cost = cost(log_.tokens_in, log_.tokens_out, llm_.config());
}

void Orchestrator::run_phase(Phase phase, void (Orchestrator::*body)()) {
    int first = static_cast<int>(log_.records.size());
    for (auto it = log_.phases.begin(); it != log_.phases.end(); ++it) {
        if (it->phase != phase) continue;
        if (it->complete) return;
        first = it->first_record;
        log_.phases.erase(it);
        break;
    }
    auto summary = [&](bool complete) {
        log_.phases.push_back(PhaseSummary{phase, first, static_cast<int>(log_.records.size()),
                                           snapshot_of(suite_.coverage()), complete});
    };
    try {
        (this->*body)();
    } catch (const Stop&) {
        summary(false);
        throw;
    }
    summary(true);
}

void Orchestrator::check_clock() {
    if (elapsed() >= config_.wall_clock_budget_s) throw Stop{"wall_clock"};
}

std::size_t Orchestrator::prompt(Phase phase, const std::optional<LineId>& target, const std::string& template_name,
                                 const Messages& messages, std::string note) {
    check_clock();
    Completion c;
    try {
        c = llm_.complete(messages);
    } catch (const BudgetExhausted&) {
        throw Stop{"token_budget"};
    }
    PromptRecord r;
    r.index = static_cast<int>(log_.records.size());
    r.phase = phase;
    r.target = target;
    r.template_name = template_name;
    r.note = std::move(note);
    r.messages = messages;
    r.response = std::move(c.text);
    r.tokens_in = c.tokens_in;
    r.tokens_out = c.tokens_out;
    r.elapsed_s = elapsed();
    r.coverage = snapshot_of(suite_.coverage());
    log_.records.push_back(std::move(r));
    return log_.records.size() - 1;
}

std::string Orchestrator::unique_id(const std::string& base) const {
    if (suite_.find(base) == nullptr) return base;
    for (int n = 2;; ++n) {
        std::string id = base + "__" + std::to_string(n);
        if (suite_.find(id) == nullptr) return id;
    }
}

bool Orchestrator::execute(const std::string& source, const Subject& subject, ExecutionTrace& trace, std::string& id) {
    id = unique_id(test_function_name(source, config_.test_prefix).value_or(config_.test_prefix + "unnamed"));
    trace = executor_.run(id, source, subject);
    trace.test_id = id;
    if (!trace.outcome.ran()) return false;
    TestCase t;
    t.id = id;
    t.source = source;
    t.trace = std::make_shared<ExecutionTrace>(trace);
    t.coverage = coverage_of(trace, project_.subjects, project_.universe);
    suite_.add(std::move(t));
    return true;
}

void Orchestrator::add_dropped(const std::string& source) {
    TestCase t;
    t.id = unique_id(test_function_name(source, config_.test_prefix).value_or(config_.test_prefix + "unnamed"));
    t.source = source;
    t.status = TestStatus::Dropped;
    suite_.add(std::move(t));
}

PromptResult Orchestrator::classify(const CoverageSnapshot& before, const std::optional<LineId>& target) const {
    if (target && suite_.coverage().covered_lines.count(*target)) return PromptResult::CoveredTarget;
    if (snapshot_of(suite_.coverage()).covered_lines > before.covered_lines) return PromptResult::NewCoverage;
    return PromptResult::NoProgress;
}

bool Orchestrator::repair(std::string source, ExecutionTrace trace, const Subject& subject, const PromptContext& ctx,
                          const std::optional<LineId>& target) {
    for (int attempt = 0; attempt < config_.repair_attempts; ++attempt) {
        if (trace.outcome.status == OutcomeStatus::Timeout) break;
        auto msgs = build_repair_prompt(prompts_, source, trace.outcome.message, ctx);
        auto r = prompt(Phase::Repair, target, "repair", msgs);
        auto before = snapshot_of(suite_.coverage());
        auto fixed = extract_test(log_.records[r].response, config_.test_prefix);
        log_.records[r].extracted_test = fixed;
        if (!fixed) continue;
        source = *fixed;
        std::string id;
        if (execute(source, subject, trace, id)) {
            auto& rec = log_.records[r];
            rec.test_ids = {id};
            rec.result = classify(before, target);
            rec.coverage = snapshot_of(suite_.coverage());
            return true;
        }
    }
    add_dropped(source);
    return false;
}

void Orchestrator::seed_phase() {
    if (config_.seed_count == 0) return;
    for (const auto& subject : project_.subjects) {
        PromptContext ctx;
        ctx.module = subject.module;
        ctx.test_prefix = config_.test_prefix;
        auto r = prompt(Phase::Seed, std::nullopt, "seed",
                        build_seed_prompt(prompts_, subject.unit, ctx, config_.seed_count));
        auto before = snapshot_of(suite_.coverage());
        auto extracted = extract_test(log_.records[r].response, config_.test_prefix);
        log_.records[r].extracted_test = extracted;
        if (!extracted) continue;

        auto parts = split_tests(*extracted, config_.test_prefix);
        if (parts.size() > static_cast<std::size_t>(config_.seed_count)) parts.resize(config_.seed_count);
        std::vector<std::pair<std::string, ExecutionTrace>> failed;
        for (const auto& part : parts) {
            ExecutionTrace trace;
            std::string id;
            if (execute(part, subject, trace, id)) {
                log_.records[r].test_ids.push_back(id);
            } else {
                failed.emplace_back(part, std::move(trace));
            }
        }
        auto& rec = log_.records[r];
        rec.result = rec.test_ids.empty() ? PromptResult::Invalid : classify(before, std::nullopt);
        rec.coverage = snapshot_of(suite_.coverage());
        for (auto& [source, trace] : failed) repair(source, std::move(trace), subject, ctx, std::nullopt);
    }
}

void Orchestrator::generation_phase() { target_loop(Phase::Generation, config_.gen_retries_per_line); }

void Orchestrator::regeneration_phase() {
    target_loop(Phase::Regeneration, config_.regen_retries_per_line);
    log_.unachieved.clear();
    for (const auto& line : project_.universe.lines) {
        if (!suite_.coverage().covered_lines.count(line)) log_.unachieved.push_back(line);
    }
}

int Orchestrator::attempts_spent(Phase phase, const LineId& line) const {
    int n = 0;
    for (const auto& r : log_.records) {
        if (r.phase == phase && r.target == line) ++n;
    }
    return n;
}

void Orchestrator::target_loop(Phase phase, int budget) {
    for (const auto& subject : project_.subjects) {
        for (int line : subject.unit.executable_lines) {
            LineId id = subject.unit.line_id(line);
            auto covered = [&] { return suite_.coverage().covered_lines.count(id) > 0; };
            if (covered()) continue;
            int spent = attempts_spent(phase, id);
            if (spent >= budget) continue;
            Slice slice;
            try {
                slice = backward_slice(subject.unit, subject.cfg, subject.cdg, line);
            } catch (const RenderError&) {
                continue;  // stays uncovered and is reported as unachieved
            }
            auto ctx = context_for(subject.unit, subject.module, line);
            ctx.test_prefix = config_.test_prefix;
            for (int attempt = spent; attempt < budget && !covered(); ++attempt) {
                if (config_.saturation_stop && attempt >= 2 && saturation_check(log_)) break;
                attempt_line(phase, subject, line, slice, ctx);
            }
        }
    }
}

void Orchestrator::attempt_line(Phase phase, const Subject& subject, int line, const Slice& slice,
                                const PromptContext& ctx) {
    LineId target = subject.unit.line_id(line);
    Messages msgs;
    std::string template_name = "generation";
    std::string note;
    if (phase == Phase::Regeneration) {
        note = "no closest test; generation template used";
        if (auto closest = find_closest_test(suite_, target, subject)) {
            try {
                auto annotated = annotate_slice(slice, subject.unit, *closest->test->trace);
                msgs = build_regeneration_prompt(prompts_, annotated, closest->test, target, subject.unit, ctx);
                template_name = "regeneration";
                note = "closest test " + closest->test->id + " at distance " + std::to_string(closest->distance);
            } catch (const LineMismatch& e) {
                note = std::string("closest trace unusable (") + e.what() + "); generation template used";
            }
        }
    }
    if (msgs.empty()) msgs = build_generation_prompt(prompts_, slice, subject.unit, ctx);

    auto r = prompt(phase, target, template_name, msgs, note);
    auto before = snapshot_of(suite_.coverage());
    auto extracted = extract_test(log_.records[r].response, config_.test_prefix);
    log_.records[r].extracted_test = extracted;
    if (!extracted) return;
    ExecutionTrace trace;
    std::string id;
    if (execute(*extracted, subject, trace, id)) {
        auto& rec = log_.records[r];
        rec.test_ids = {id};
        rec.result = classify(before, target);
        rec.coverage = snapshot_of(suite_.coverage());
    } else {
        repair(*extracted, std::move(trace), subject, ctx, target);
    }
}

void Orchestrator::persist(const fs::path& out_dir) const {
    fs::create_directories(out_dir / "tests");
    fs::create_directories(out_dir / "traces");
    Json tests = Json::array();
    for (const auto& t : suite_.tests()) {
        write_text(out_dir / "tests" / (t.id + ".py"), t.source);
        Json entry{{"id", t.id}, {"status", t.status == TestStatus::Valid ? "valid" : "dropped"}};
        if (t.trace) {
            write_text(out_dir / "traces" / (t.id + ".json"), trace_to_json(*t.trace).dump(1) + "\n");
            entry["outcome"] = status_name(t.trace->outcome.status);
        } else {
            entry["outcome"] = nullptr;
        }
        tests.push_back(std::move(entry));
    }
    Json subjects = Json::array();
    for (const auto& s : project_.subjects) subjects.push_back(s.unit.path);
    Json index{{"v", 1}, {"root", fs::absolute(project_.root).lexically_normal().string()}, {"subjects", subjects},
               {"tests", tests}};
    write_text(out_dir / "suite.json", index.dump(1) + "\n");
    write_text(out_dir / "coverage.json", coverage_to_json(suite_.coverage()).dump(1) + "\n");
    write_text(out_dir / "runlog.json", runlog_to_json(log_).dump(1) + "\n");
}

}  // namespace weaver
