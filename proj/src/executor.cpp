#include "weaver/executor.hpp"

#include "weaver/error.hpp"
#include "weaver/prompting.hpp"

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace weaver {

namespace fs = std::filesystem;

namespace {

ExecutionTrace error_trace(const std::string& test_id, std::string message) {
    ExecutionTrace t;
    t.test_id = test_id;
    t.outcome.status = OutcomeStatus::Error;
    t.outcome.message = std::move(message);
    return t;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    return out + "'";
}

}  // namespace

bool command_available(const std::string& command) {
    if (command.find('/') != std::string::npos) return access(command.c_str(), X_OK) == 0;
    const char* path = std::getenv("PATH");
    if (path == nullptr) return false;
    std::istringstream dirs(path);
    for (std::string dir; std::getline(dirs, dir, ':');) {
        if (dir.empty()) dir = ".";
        if (access((fs::path(dir) / command).c_str(), X_OK) == 0) return true;
    }
    return false;
}

FixtureExecutor::FixtureExecutor(fs::path dir, std::string test_prefix)
    : dir_(std::move(dir)), prefix_(std::move(test_prefix)) {}

ExecutionTrace FixtureExecutor::run(const std::string& test_id, const std::string& test_source, const Subject&) {
    auto name = test_function_name(test_source, prefix_);
    if (!name) return error_trace(test_id, "no test function named " + prefix_ + "* was collected");
    fs::path file = dir_ / (*name + ".json");
    if (!fs::exists(file)) return error_trace(test_id, "no recorded trace for " + *name);
    ExecutionTrace trace;
    try {
        trace = parse_trace(read_text(file));
    } catch (const TraceFormatError& e) {
        return error_trace(test_id, std::string("recorded trace unusable: ") + e.what());
    }
    trace.test_id = test_id;
    return trace;
}

ShimExecutor::ShimExecutor(std::string shim, fs::path project_root, fs::path work_dir, double timeout_s)
    : shim_(std::move(shim)), root_(std::move(project_root)), work_dir_(std::move(work_dir)), timeout_s_(timeout_s) {}

ExecutionTrace ShimExecutor::run(const std::string& test_id, const std::string& test_source, const Subject& subject) {
    if (!command_available(shim_)) throw ShimUnavailable("tracer command not found: " + shim_);
    fs::create_directories(work_dir_);
    fs::path test_file = fs::absolute(work_dir_ / (test_id + ".py"));
    fs::path err_file = fs::absolute(work_dir_ / (test_id + ".stderr"));
    std::ofstream(test_file, std::ios::binary) << test_source;

    fs::path subject_file = fs::absolute(root_ / subject.unit.path);
    std::ostringstream cmd;
    cmd << "cd " << shell_quote(fs::absolute(root_).string()) << " && PYTHONPATH="
        << shell_quote(fs::absolute(root_).string()) << " " << shell_quote(shim_) << " --test "
        << shell_quote(test_file.string()) << " --subject " << shell_quote(subject_file.string()) << " --timeout "
        << timeout_s_ << " 2> " << shell_quote(err_file.string());

    std::string out;
    FILE* pipe = popen(cmd.str().c_str(), "r");
    if (pipe == nullptr) throw ShimUnavailable("cannot start tracer: " + shim_);
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    int status = pclose(pipe);
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (code == 127) throw ShimUnavailable("tracer command failed to start: " + shim_);
    if (code != 0) {
        return error_trace(test_id, "tracer exited with status " + std::to_string(code) + ": " + read_text(err_file));
    }
    try {
        auto trace = parse_trace(out);
        trace.test_id = test_id;
        return trace;
    } catch (const TraceFormatError& e) {
        return error_trace(test_id, std::string("tracer output rejected: ") + e.what());
    }
}

}  // namespace weaver
