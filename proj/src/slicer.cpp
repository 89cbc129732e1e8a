#include "weaver/slicer.hpp"

#include "weaver/error.hpp"

#include <algorithm>
#include <deque>
#include <exception>

namespace weaver {

namespace {

const Statement& stmt_at(const SourceUnit& unit, int line) {
    return unit.statements[static_cast<std::size_t>(unit.first_line_index.at(line))];
}

bool is_jump(StmtKind k) {
    return k == StmtKind::Break || k == StmtKind::Continue || k == StmtKind::Return || k == StmtKind::Raise;
}

bool is_loop(StmtKind k) { return k == StmtKind::For || k == StmtKind::While; }

/// Nearest enclosing loop statement index, or -1 (stops at a def boundary).
int enclosing_loop(const SourceUnit& unit, int idx) {
    int p = unit.statements[static_cast<std::size_t>(idx)].parent;
    while (p >= 0) {
        const auto& s = unit.statements[static_cast<std::size_t>(p)];
        if (is_loop(s.kind)) return p;
        if (s.kind == StmtKind::FunctionDef || s.kind == StmtKind::ClassDef) return -1;
        p = s.parent;
    }
    return -1;
}

int target_region(const SourceUnit& unit, const Cfg& cfg, int target) {
    if (unit.executable_lines.count(target) == 0) throw UnknownLine(unit.path, target);
    auto region = cfg.region_of(target);
    if (!region) throw UnknownLine(unit.path, target);
    return *region;
}

}  // namespace

std::set<int> reachable_prefix_filter(const SourceUnit& unit, const Cfg& cfg, int target) {
    int region = target_region(unit, cfg, target);
    const auto& r = cfg.regions[static_cast<std::size_t>(region)];
    const std::size_t n = cfg.nodes.size();

    auto sweep = [&](int start, bool forward) {
        std::vector<char> seen(n, 0);
        std::vector<int> stack{start};
        seen[static_cast<std::size_t>(start)] = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            const auto& node = cfg.nodes[static_cast<std::size_t>(v)];
            auto visit = [&](int w) {
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    stack.push_back(w);
                }
            };
            if (forward) {
                for (const auto& e : node.succ) visit(e.target);
            } else {
                for (int p : node.pred) visit(p);
            }
        }
        return seen;
    };

    int target_node = cfg.line_index.at(target);
    auto from_entry = sweep(r.entry, true);
    auto to_target = sweep(target_node, false);

    std::set<int> out{target};
    for (int v : r.nodes) {
        const auto& node = cfg.nodes[static_cast<std::size_t>(v)];
        if (node.line == 0 || node.kind == NodeKind::Exit) continue;
        if (from_entry[static_cast<std::size_t>(v)] && to_target[static_cast<std::size_t>(v)]) out.insert(node.line);
    }
    return out;
}

ReachingDefs::ReachingDefs(const SourceUnit& unit, const Cfg& cfg) : unit_(unit), cfg_(cfg) {
    const std::size_t n = cfg.nodes.size();
    in_.assign(n, {});
    kills_.assign(n, {});

    // Definitions generated by each node; partial updates do not kill.
    for (std::size_t v = 0; v < n; ++v) {
        const auto& node = cfg.nodes[v];
        if (node.kind == NodeKind::FunctionEntry) {
            int fn = cfg.regions[static_cast<std::size_t>(node.region)].function;
            if (fn >= 0) {
                for (const auto& p : unit.functions[static_cast<std::size_t>(fn)].params) kills_[v][p] = true;
            }
        } else if (node.kind == NodeKind::Statement) {
            const auto& s = unit.statements[static_cast<std::size_t>(node.stmt)];
            for (const auto& d : s.defined) {
                bool partial = std::find(s.partial_defs.begin(), s.partial_defs.end(), d) != s.partial_defs.end();
                auto [it, inserted] = kills_[v].emplace(d, !partial);
                if (!inserted) it->second = it->second || !partial;
            }
        }
    }

    // Round-robin fixed point of IN[v] = union over preds of OUT[p].
    auto out_of = [&](std::size_t v) {
        std::map<std::string, std::set<int>> out = in_[v];
        for (const auto& [name, kills] : kills_[v]) {
            auto& s = out[name];
            if (kills) s.clear();
            s.insert(static_cast<int>(v));
        }
        return out;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t v = 0; v < n; ++v) {
            std::map<std::string, std::set<int>> merged;
            for (int p : cfg.nodes[v].pred) {
                for (auto& [name, defs] : out_of(static_cast<std::size_t>(p))) merged[name].insert(defs.begin(), defs.end());
            }
            if (merged != in_[v]) {
                in_[v] = std::move(merged);
                changed = true;
            }
        }
    }
}

std::set<int> ReachingDefs::defs_reaching(int line, const std::string& name) const {
    std::set<int> lines;
    auto node = cfg_.node_at(line);
    if (!node) return lines;
    const auto& in = in_[static_cast<std::size_t>(*node)];
    auto it = in.find(name);
    if (it == in.end()) return lines;
    for (int d : it->second) lines.insert(cfg_.nodes[static_cast<std::size_t>(d)].line);
    return lines;
}

std::set<int> dependency_closure(const SourceUnit& unit, const Cfg& cfg, const Cdg& cdg, const ReachingDefs& rd,
                                 int target, const std::set<int>& candidates) {
    int region = target_region(unit, cfg, target);
    const int header_line = [&] {
        int fn = cfg.regions[static_cast<std::size_t>(region)].function;
        if (fn < 0) return 0;
        return unit.statements[static_cast<std::size_t>(unit.functions[static_cast<std::size_t>(fn)].header)].line;
    }();

    // Lines enter either as dependences of the target (restricted to the
    // phase-1 candidates) or as support for a retained loop's break/continue
    // (forced, together with everything they need).
    std::set<int> kept;
    std::deque<std::pair<int, bool>> work;
    auto add = [&](int line, bool forced) {
        if (line <= 0) return;
        if (!forced && candidates.count(line) == 0) return;
        if (kept.insert(line).second) work.emplace_back(line, forced);
    };

    auto drain = [&] {
        while (!work.empty()) {
            auto [line, forced] = work.front();
            work.pop_front();
            if (line == header_line) continue;  // parameters are bound by the call, nothing precedes them
            const auto& s = stmt_at(unit, line);
            for (const auto& name : s.referenced) {
                for (int d : rd.defs_reaching(line, name)) add(d, forced);
            }
            for (const auto& c : cdg.of(line)) add(c.condition, forced);
            if (s.parent >= 0) add(unit.statements[static_cast<std::size_t>(s.parent)].line, forced);
            if (s.prev_clause >= 0) add(unit.statements[static_cast<std::size_t>(s.prev_clause)].line, forced);
        }
    };

    add(target, false);
    if (header_line > 0) add(header_line, false);
    drain();

    // A retained loop keeps every break/continue that leaves or restarts it,
    // so the slice iterates exactly as often as the original.
    std::vector<int> jumps;
    for (int v : cfg.regions[static_cast<std::size_t>(region)].nodes) {
        const auto& node = cfg.nodes[static_cast<std::size_t>(v)];
        if (node.kind != NodeKind::Statement) continue;
        auto k = unit.statements[static_cast<std::size_t>(node.stmt)].kind;
        if (k == StmtKind::Break || k == StmtKind::Continue) jumps.push_back(node.stmt);
    }
    bool grew = true;
    while (grew) {
        grew = false;
        for (int idx : jumps) {
            int loop = enclosing_loop(unit, idx);
            int line = unit.statements[static_cast<std::size_t>(idx)].line;
            if (loop >= 0 && kept.count(unit.statements[static_cast<std::size_t>(loop)].line) && !kept.count(line)) {
                add(line, true);
                grew = true;
            }
        }
        drain();
    }

    // Early exits directly inside a kept arm keep that arm's meaning.
    for (int v : cfg.regions[static_cast<std::size_t>(region)].nodes) {
        const auto& node = cfg.nodes[static_cast<std::size_t>(v)];
        if (node.kind != NodeKind::Statement) continue;
        const auto& s = unit.statements[static_cast<std::size_t>(node.stmt)];
        if (!is_jump(s.kind) || s.parent < 0) continue;
        const auto& parent = unit.statements[static_cast<std::size_t>(s.parent)];
        if (parent.kind == StmtKind::FunctionDef || parent.kind == StmtKind::ClassDef) continue;
        if (kept.count(parent.line)) kept.insert(s.line);
    }
    return kept;
}

std::set<int> dependency_closure(const SourceUnit& unit, const Cfg& cfg, const Cdg& cdg, int target,
                                 const std::set<int>& candidates) {
    ReachingDefs rd(unit, cfg);
    return dependency_closure(unit, cfg, cdg, rd, target, candidates);
}

namespace {

/// Module-level support for a function-region slice: imports, enclosing
/// class/def headers with decorators, and module bindings of free names.
void add_module_support(const SourceUnit& unit, const Cfg& cfg, const ReachingDefs& rd, int region,
                        std::set<int>& retained) {
    for (const auto& s : unit.statements) {
        if (s.kind == StmtKind::Import && s.parent < 0) retained.insert(s.line);
    }
    int fn = cfg.regions[static_cast<std::size_t>(region)].function;
    if (fn < 0) return;
    int header = unit.functions[static_cast<std::size_t>(fn)].header;

    // Enclosing headers up to module level, plus decorators of each.
    auto keep_with_decorators = [&](int idx) {
        const auto& s = unit.statements[static_cast<std::size_t>(idx)];
        retained.insert(s.line);
        for (int i = idx - 1; i >= 0; --i) {
            const auto& d = unit.statements[static_cast<std::size_t>(i)];
            if (d.kind != StmtKind::Decorator || d.indent != s.indent) break;
            retained.insert(d.line);
        }
    };
    for (int p = header; p >= 0; p = unit.statements[static_cast<std::size_t>(p)].parent) keep_with_decorators(p);

    // Names read in the function with no local reaching definition resolve
    // to module-level bindings: assignments, imports, helper defs and classes.
    std::deque<std::string> free_names;
    std::set<std::string> seen;
    for (int line : std::set<int>(retained)) {
        auto region_of = cfg.region_of(line);
        if (!region_of || *region_of != region) continue;
        const auto& s = stmt_at(unit, line);
        for (const auto& name : s.referenced) {
            if (rd.defs_reaching(line, name).empty() && seen.insert(name).second) free_names.push_back(name);
        }
    }
    // Helper defs and classes are kept whole, since a call needs the body.
    auto keep_subtree = [&](int idx) {
        std::vector<int> stack{idx};
        while (!stack.empty()) {
            int i = stack.back();
            stack.pop_back();
            const auto& s = unit.statements[static_cast<std::size_t>(i)];
            retained.insert(s.line);
            for (const auto& r : s.referenced) {
                if (seen.insert(r).second) free_names.push_back(r);
            }
            stack.insert(stack.end(), s.children.begin(), s.children.end());
            if (s.next_clause >= 0) stack.push_back(s.next_clause);
        }
    };
    while (!free_names.empty()) {
        std::string name = free_names.front();
        free_names.pop_front();
        for (std::size_t i = 0; i < unit.statements.size(); ++i) {
            const auto& s = unit.statements[i];
            if (s.parent >= 0) continue;
            if (std::find(s.defined.begin(), s.defined.end(), name) == s.defined.end()) continue;
            if (s.kind == StmtKind::FunctionDef || s.kind == StmtKind::ClassDef) {
                if (retained.count(s.line)) continue;
                keep_with_decorators(static_cast<int>(i));
                keep_subtree(static_cast<int>(i));
                continue;
            }
            bool binding = s.kind == StmtKind::Assign || s.kind == StmtKind::AugAssign ||
                           s.kind == StmtKind::AnnAssign || s.kind == StmtKind::Import;
            if (!binding || !retained.insert(s.line).second) continue;
            for (const auto& r : s.referenced) {
                if (seen.insert(r).second) free_names.push_back(r);
            }
        }
    }
}

}  // namespace

Slice render_slice(const SourceUnit& unit, int target, const std::set<int>& retained, const RenderOptions& options) {
    Slice slice;
    slice.target = unit.line_id(target);
    slice.retained = retained;

    std::string text;
    int out_line = 0;
    auto emit = [&](std::string line) {
        text += line;
        text += '\n';
        ++out_line;
    };

    for (const auto& s : unit.statements) {
        if (retained.count(s.line) == 0) continue;
        for (int l = s.line; l <= s.last_line; ++l) {
            std::string line = unit.physical_lines[static_cast<std::size_t>(l - 1)];
            int col = unit.comment_columns[static_cast<std::size_t>(l - 1)];
            if (col >= 0) line.resize(static_cast<std::size_t>(col));
            while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
            if (l == s.last_line) {
                std::string note;
                if (options.annotate) note = "line " + std::to_string(s.line);
                if (s.line == target) note += std::string(note.empty() ? "" : " ") + "<-- target";
                if (!note.empty()) line += "  # " + note;
            }
            emit(std::move(line));
            slice.line_map[l] = out_line;
        }
        if (is_block_header(s.kind)) {
            bool any_child = std::any_of(s.children.begin(), s.children.end(), [&](int c) {
                return retained.count(unit.statements[static_cast<std::size_t>(c)].line) > 0;
            });
            if (!any_child) {
                int indent = s.children.empty() ? s.indent + 4
                                                : unit.statements[static_cast<std::size_t>(s.children.front())].indent;
                emit(std::string(static_cast<std::size_t>(indent), ' ') + "pass");
            }
        }
    }
    slice.rendered_text = std::move(text);

    try {
        parse_unit(slice.rendered_text, unit.path);
    } catch (const Error& e) {
        throw RenderError("slice of " + to_string(slice.target) + " does not re-parse: " + e.what());
    }
    return slice;
}

namespace {

Slice slice_one(const SourceUnit& unit, const Cfg& cfg, const Cdg& cdg, const ReachingDefs& rd, int target,
                const RenderOptions& options) {
    int region = target_region(unit, cfg, target);
    auto candidates = reachable_prefix_filter(unit, cfg, target);
    auto retained = dependency_closure(unit, cfg, cdg, rd, target, candidates);
    add_module_support(unit, cfg, rd, region, retained);

    Slice slice = render_slice(unit, target, retained, options);

    int total = 0;
    int removed = 0;
    for (int line : unit.executable_lines) {
        auto r = cfg.region_of(line);
        if (!r || *r != region) continue;
        ++total;
        if (retained.count(line) == 0) ++removed;
    }
    slice.reduction_ratio = total == 0 ? 0.0 : static_cast<double>(removed) / total;
    return slice;
}

}  // namespace

Slice backward_slice(const SourceUnit& unit, const Cfg& cfg, const Cdg& cdg, int target, const RenderOptions& options) {
    ReachingDefs rd(unit, cfg);
    return slice_one(unit, cfg, cdg, rd, target, options);
}

std::vector<Slice> slice_lines_serial(const SourceUnit& unit, const Cfg& cfg, const Cdg& cdg,
                                      const std::vector<int>& targets, const RenderOptions& options) {
    ReachingDefs rd(unit, cfg);
    std::vector<Slice> out;
    out.reserve(targets.size());
    for (int t : targets) out.push_back(slice_one(unit, cfg, cdg, rd, t, options));
    return out;
}

std::vector<Slice> slice_lines(const SourceUnit& unit, const Cfg& cfg, const Cdg& cdg, const std::vector<int>& targets,
                               const RenderOptions& options) {
    ReachingDefs rd(unit, cfg);
    std::vector<Slice> out(targets.size());
    std::vector<std::exception_ptr> errors(targets.size());
    const long n = static_cast<long>(targets.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = slice_one(unit, cfg, cdg, rd, targets[static_cast<std::size_t>(i)], options);
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

}  // namespace weaver
