#pragma once

#include "weaver/subject.hpp"
#include "weaver/trace.hpp"

#include <filesystem>
#include <string>

namespace weaver {

/// Runs one candidate test against one subject and returns its trace. A
/// test that cannot be collected or run yields an `error` outcome whose
/// message explains why.
class TestExecutor {
public:
    virtual ~TestExecutor() = default;
    virtual ExecutionTrace run(const std::string& test_id, const std::string& test_source, const Subject& subject) = 0;
};

/// Serves previously recorded traces: a test whose first prefixed function
/// is `name` gets `<dir>/<name>.json`.
class FixtureExecutor : public TestExecutor {
public:
    FixtureExecutor(std::filesystem::path dir, std::string test_prefix);
    ExecutionTrace run(const std::string& test_id, const std::string& test_source, const Subject& subject) override;

private:
    std::filesystem::path dir_;
    std::string prefix_;
};

/// Runs each test in a fresh tracer subprocess:
/// `<shim> --test <file> --subject <file> --timeout <s>` with the project
/// root as working directory and import path.
class ShimExecutor : public TestExecutor {
public:
    ShimExecutor(std::string shim, std::filesystem::path project_root, std::filesystem::path work_dir,
                 double timeout_s);
    /// Throws ShimUnavailable when the shim command cannot be found.
    ExecutionTrace run(const std::string& test_id, const std::string& test_source, const Subject& subject) override;

private:
    std::string shim_;
    std::filesystem::path root_;
    std::filesystem::path work_dir_;
    double timeout_s_;
};

/// True when `command` names an executable file, directly or via PATH.
bool command_available(const std::string& command);

}  // namespace weaver
