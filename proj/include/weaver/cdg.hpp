#pragma once

#include "weaver/cfg.hpp"

#include <map>
#include <string>
#include <vector>

namespace weaver {

/// A governing condition and the branch outcome under which the dependent
/// line can execute.
struct Control {
    int condition = 0;  // decision line
    bool polarity = true;

    auto operator<=>(const Control&) const = default;
};

/// Transitive control dependences per line, nearest condition first.
struct Cdg {
    std::string file;
    std::map<int, std::vector<Control>> controls;

    const std::vector<Control>& of(int line) const;
};

/// Post-dominator based control dependence, closed transitively so the full
/// governing chain of every line appears. Self-dependences of loop headers
/// are omitted.
Cdg build_cdg(const Cfg& cfg);

/// Cond(target): the proximity-ordered conditions governing `target`.
/// Throws UnknownLine when `target` is not executable in `unit`.
std::vector<Control> control_conditions(const Cdg& cdg, const SourceUnit& unit, int target);

/// Immediate post-dominator of every node in `region` (-1 for the exit and
/// for nodes that cannot reach it). Indexed by global node id.
std::vector<int> post_dominators(const Cfg& cfg, int region);

}  // namespace weaver
