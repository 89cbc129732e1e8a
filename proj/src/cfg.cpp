#include "weaver/cfg.hpp"

#include "weaver/error.hpp"

namespace weaver {

std::string_view edge_kind_name(EdgeKind kind) {
    switch (kind) {
        case EdgeKind::Fallthrough: return "fallthrough";
        case EdgeKind::BranchTrue: return "branch-true";
        case EdgeKind::BranchFalse: return "branch-false";
        case EdgeKind::LoopBack: return "loop-back";
        case EdgeKind::LoopExit: return "loop-exit";
    }
    return "?";
}

std::optional<int> Cfg::node_at(int line) const {
    auto it = line_index.find(line);
    if (it == line_index.end()) return std::nullopt;
    return it->second;
}

std::optional<int> Cfg::region_of(int line) const {
    auto n = node_at(line);
    if (!n) return std::nullopt;
    return nodes[static_cast<std::size_t>(*n)].region;
}

std::vector<Cfg::Successor> Cfg::successors(int line) const {
    std::vector<Successor> out;
    auto n = node_at(line);
    if (!n) return out;
    for (const auto& e : nodes[static_cast<std::size_t>(*n)].succ) {
        const auto& target = nodes[static_cast<std::size_t>(e.target)];
        out.push_back(Successor{target.kind == NodeKind::Exit ? 0 : target.line, e.kind});
    }
    return out;
}

namespace {

class Builder {
public:
    explicit Builder(const SourceUnit& unit) : unit_(unit) { cfg_.file = unit.path; }

    Cfg run() {
        int region = new_region("<module>", -1);
        int entry = new_node(NodeKind::ModuleEntry, 0, -1, region);
        int exit = new_node(NodeKind::Exit, 0, -1, region);
        cfg_.regions[0].entry = entry;
        cfg_.regions[0].exit = exit;
        std::vector<int> top;
        for (std::size_t i = 0; i < unit_.statements.size(); ++i) {
            if (unit_.statements[i].parent < 0) top.push_back(static_cast<int>(i));
        }
        edge(entry, sequence(top, exit, EdgeKind::Fallthrough, region, nullptr), EdgeKind::Fallthrough);
        return std::move(cfg_);
    }

private:
    struct Loop {
        int header;
        int exit_target;
    };

    const Statement& stmt(int idx) const { return unit_.statements[static_cast<std::size_t>(idx)]; }

    int new_region(std::string name, int function) {
        cfg_.regions.push_back(CfgRegion{std::move(name), function, -1, -1, {}});
        return static_cast<int>(cfg_.regions.size() - 1);
    }

    int new_node(NodeKind kind, int line, int stmt_index, int region) {
        CfgNode node;
        node.kind = kind;
        node.line = line;
        node.stmt = stmt_index;
        node.region = region;
        cfg_.nodes.push_back(std::move(node));
        int id = static_cast<int>(cfg_.nodes.size() - 1);
        cfg_.regions[static_cast<std::size_t>(region)].nodes.push_back(id);
        if (kind == NodeKind::Statement) cfg_.line_index[line] = id;
        return id;
    }

    void edge(int from, int to, EdgeKind kind) {
        cfg_.nodes[static_cast<std::size_t>(from)].succ.push_back(CfgEdge{to, kind});
        cfg_.nodes[static_cast<std::size_t>(to)].pred.push_back(from);
    }

    /// Builds a statement list back to front and returns its entry node
    /// (`follow` when the list is empty).
    int sequence(const std::vector<int>& stmts, int follow, EdgeKind follow_kind, int region, const Loop* loop) {
        int next = follow;
        EdgeKind next_kind = follow_kind;
        for (auto it = stmts.rbegin(); it != stmts.rend(); ++it) {
            const auto& s = stmt(*it);
            if (s.kind == StmtKind::Elif || s.kind == StmtKind::Else) continue;  // reached through the clause chain
            next = statement(*it, next, next_kind, region, loop);
            next_kind = EdgeKind::Fallthrough;
        }
        return next;
    }

    int statement(int idx, int next, EdgeKind next_kind, int region, const Loop* loop) {
        const auto& s = stmt(idx);
        const int exit = cfg_.regions[static_cast<std::size_t>(region)].exit;
        switch (s.kind) {
            case StmtKind::Return:
            case StmtKind::Raise: {
                int n = new_node(NodeKind::Statement, s.line, idx, region);
                edge(n, exit, EdgeKind::Fallthrough);
                return n;
            }
            case StmtKind::Break: {
                if (loop == nullptr) throw SyntaxError(unit_.path, s.line, "'break' outside loop");
                int n = new_node(NodeKind::Statement, s.line, idx, region);
                edge(n, loop->exit_target, EdgeKind::LoopExit);
                return n;
            }
            case StmtKind::Continue: {
                if (loop == nullptr) throw SyntaxError(unit_.path, s.line, "'continue' not properly in loop");
                int n = new_node(NodeKind::Statement, s.line, idx, region);
                edge(n, loop->header, EdgeKind::LoopBack);
                return n;
            }
            case StmtKind::If:
            case StmtKind::Elif: {
                int n = new_node(NodeKind::Statement, s.line, idx, region);
                int on_true = sequence(s.children, next, next_kind, region, loop);
                int on_false =
                    s.next_clause >= 0 ? statement(s.next_clause, next, next_kind, region, loop) : next;
                edge(n, on_true, EdgeKind::BranchTrue);
                edge(n, on_false, EdgeKind::BranchFalse);
                return n;
            }
            case StmtKind::Else: {
                int n = new_node(NodeKind::Statement, s.line, idx, region);
                edge(n, sequence(s.children, next, next_kind, region, loop), EdgeKind::Fallthrough);
                return n;
            }
            case StmtKind::For:
            case StmtKind::While: {
                int n = new_node(NodeKind::Statement, s.line, idx, region);
                Loop inner{n, next};
                int body = sequence(s.children, n, EdgeKind::LoopBack, region, &inner);
                edge(n, body, EdgeKind::BranchTrue);
                edge(n, next, EdgeKind::BranchFalse);
                return n;
            }
            case StmtKind::FunctionDef: {
                int n = new_node(NodeKind::Statement, s.line, idx, region);
                edge(n, next, next_kind);
                int fn = -1;
                for (std::size_t f = 0; f < unit_.functions.size(); ++f) {
                    if (unit_.functions[f].header == idx) fn = static_cast<int>(f);
                }
                int r = new_region(s.defined.empty() ? "<def>" : s.defined.front(), fn);
                int entry = new_node(NodeKind::FunctionEntry, s.line, idx, r);
                int fexit = new_node(NodeKind::Exit, 0, -1, r);
                cfg_.regions[static_cast<std::size_t>(r)].entry = entry;
                cfg_.regions[static_cast<std::size_t>(r)].exit = fexit;
                edge(entry, sequence(s.children, fexit, EdgeKind::Fallthrough, r, nullptr), EdgeKind::Fallthrough);
                return n;
            }
            case StmtKind::ClassDef: {
                int n = new_node(NodeKind::Statement, s.line, idx, region);
                edge(n, sequence(s.children, next, next_kind, region, nullptr), EdgeKind::Fallthrough);
                return n;
            }
            default: {
                int n = new_node(NodeKind::Statement, s.line, idx, region);
                edge(n, next, next_kind);
                return n;
            }
        }
    }

    const SourceUnit& unit_;
    Cfg cfg_;
};

}  // namespace

Cfg build_cfg(const SourceUnit& unit) { return Builder(unit).run(); }

}  // namespace weaver
