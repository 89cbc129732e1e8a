#pragma once

#include <fstream>
#include <sstream>
#include <string>

namespace weaver::testing {

inline std::string fixture_path(const std::string& rel) { return std::string(WEAVER_FIXTURE_DIR) + "/" + rel; }
inline std::string golden_path(const std::string& rel) { return std::string(WEAVER_GOLDEN_DIR) + "/" + rel; }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string fig1_text() { return read_file(fixture_path("fig1/evaluate.py")); }

}  // namespace weaver::testing
