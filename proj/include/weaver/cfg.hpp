#pragma once

#include "weaver/source.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace weaver {

enum class EdgeKind { Fallthrough, BranchTrue, BranchFalse, LoopBack, LoopExit };

std::string_view edge_kind_name(EdgeKind kind);

struct CfgEdge {
    int target = -1;
    EdgeKind kind = EdgeKind::Fallthrough;
};

enum class NodeKind { Statement, FunctionEntry, ModuleEntry, Exit };

struct CfgNode {
    NodeKind kind = NodeKind::Statement;
    int line = 0;    // 0 for the synthetic module entry and every exit
    int stmt = -1;   // statement index, -1 for synthetic nodes
    int region = 0;
    std::vector<CfgEdge> succ;
    std::vector<int> pred;
};

/// One intraprocedural graph: the module body or a function body.
struct CfgRegion {
    std::string name;
    int function = -1;  // index into SourceUnit::functions, -1 for the module body
    int entry = -1;
    int exit = -1;
    std::vector<int> nodes;
};

/// Statement-level control-flow graph of a unit. Function calls are opaque;
/// each def body is its own region whose entry node carries the def line.
class Cfg {
public:
    std::string file;
    std::vector<CfgNode> nodes;
    std::vector<CfgRegion> regions;

    /// Node of the statement starting at `line` (def lines map to the
    /// enclosing region's statement node, not to the function entry).
    std::optional<int> node_at(int line) const;
    /// Region containing the statement at `line`.
    std::optional<int> region_of(int line) const;

    struct Successor {
        int line;  // 0 when the successor is a region exit
        EdgeKind kind;
    };
    std::vector<Successor> successors(int line) const;

    std::map<int, int> line_index;  // statement line -> node
};

Cfg build_cfg(const SourceUnit& unit);

}  // namespace weaver
