#pragma once

#include "weaver/cdg.hpp"
#include "weaver/cfg.hpp"
#include "weaver/source.hpp"

#include <string>
#include <vector>

namespace weaver {

/// A parsed subject file with its control-flow and control-dependence graphs.
struct Subject {
    SourceUnit unit;
    Cfg cfg;
    Cdg cdg;
    std::string module;  // dotted import name
};

/// Parses `text` and builds the graphs. `path` is the subject path as it
/// appears in traces; `relative_path` (relative to the project root) gives
/// the module name.
Subject make_subject(std::string_view text, const std::string& path, const std::string& relative_path);

/// Reads and parses a subject file. Throws IoError, SyntaxError or
/// UnsupportedConstruct.
Subject load_subject(const std::string& path, const std::string& relative_path);

/// The subject whose path names `file`, or nullptr.
const Subject* find_subject(const std::vector<Subject>& subjects, const std::string& file);

}  // namespace weaver
