#include "weaver/subject.hpp"

#include "weaver/error.hpp"

#include <fstream>
#include <sstream>

namespace weaver {

Subject make_subject(std::string_view text, const std::string& path, const std::string& relative_path) {
    Subject s;
    s.unit = parse_unit(text, path);
    s.cfg = build_cfg(s.unit);
    s.cdg = build_cdg(s.cfg);
    s.module = module_name_for(relative_path);
    return s;
}

Subject load_subject(const std::string& path, const std::string& relative_path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read subject file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return make_subject(ss.str(), path, relative_path);
}

const Subject* find_subject(const std::vector<Subject>& subjects, const std::string& file) {
    for (const auto& s : subjects) {
        if (same_file(s.unit.path, file)) return &s;
    }
    return nullptr;
}

}  // namespace weaver
