#pragma once

#include "weaver/cdg.hpp"
#include "weaver/cfg.hpp"
#include "weaver/source.hpp"

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace weaver {

/// A reduced, re-parseable view of a unit focused on one target line.
struct Slice {
    LineId target;
    std::set<int> retained;       // original statement first-lines kept
    std::string rendered_text;
    std::map<int, int> line_map;  // original physical line -> rendered line
    double reduction_ratio = 0.0; // fraction of the region's executable lines removed
};

struct RenderOptions {
    bool annotate = false;  // append "# line N" with the original line number
};

/// Phase 1: lines that can execute before `target` on some path from the
/// entry of the target's region (the def header included), plus `target`.
/// Throws UnknownLine when `target` is not executable.
std::set<int> reachable_prefix_filter(const SourceUnit& unit, const Cfg& cfg, int target);

/// Reaching definitions per region, precomputed once per unit and shared by
/// every slice over that unit. Immutable after construction.
class ReachingDefs {
public:
    ReachingDefs(const SourceUnit& unit, const Cfg& cfg);

    /// Lines whose definitions of `name` may reach the start of `line`.
    /// The def line stands for parameter definitions.
    std::set<int> defs_reaching(int line, const std::string& name) const;

private:
    const SourceUnit& unit_;
    const Cfg& cfg_;
    std::vector<std::map<std::string, std::set<int>>> in_;  // per node: name -> defining nodes
    std::vector<std::map<std::string, bool>> kills_;        // per node: name -> full (killing) def
};

/// Phase 2: least fixed point from `target` under reaching definitions and
/// control dependence, restricted to `candidates`, together with the
/// structural lines (enclosing headers, `else:` keywords, preceding clauses,
/// loop exits) that keep the kept lines' nesting intact.
std::set<int> dependency_closure(const SourceUnit& unit, const Cfg& cfg, const Cdg& cdg, const ReachingDefs& rd,
                                 int target, const std::set<int>& candidates);
std::set<int> dependency_closure(const SourceUnit& unit, const Cfg& cfg, const Cdg& cdg, int target,
                                 const std::set<int>& candidates);

/// Both phases plus module-level support (imports, enclosing class header,
/// decorators, module bindings of free names) and rendering.
/// Throws UnknownLine or RenderError.
Slice backward_slice(const SourceUnit& unit, const Cfg& cfg, const Cdg& cdg, int target,
                     const RenderOptions& options = {});

/// Renders `retained` statements in original order, filling emptied blocks
/// with `pass`. Throws RenderError when the result does not re-parse.
Slice render_slice(const SourceUnit& unit, int target, const std::set<int>& retained, const RenderOptions& options);

/// Slices many targets of one unit. The parallel version spreads targets
/// over OpenMP threads; results are positionally identical to the serial one.
std::vector<Slice> slice_lines(const SourceUnit& unit, const Cfg& cfg, const Cdg& cdg, const std::vector<int>& targets,
                               const RenderOptions& options = {});
std::vector<Slice> slice_lines_serial(const SourceUnit& unit, const Cfg& cfg, const Cdg& cdg,
                                      const std::vector<int>& targets, const RenderOptions& options = {});

}  // namespace weaver
