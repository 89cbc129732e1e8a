#include "weaver/cdg.hpp"

#include "weaver/error.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <set>

namespace weaver {

const std::vector<Control>& Cdg::of(int line) const {
    static const std::vector<Control> empty;
    auto it = controls.find(line);
    return it == controls.end() ? empty : it->second;
}

std::vector<int> post_dominators(const Cfg& cfg, int region) {
    const auto& r = cfg.regions[static_cast<std::size_t>(region)];
    std::vector<int> ipdom(cfg.nodes.size(), -1);
    std::vector<int> order(cfg.nodes.size(), -1);  // postorder index on the reverse graph

    // Iterative DFS over predecessor edges from the exit.
    std::vector<int> post;
    {
        std::vector<char> seen(cfg.nodes.size(), 0);
        std::vector<std::pair<int, std::size_t>> stack{{r.exit, 0}};
        seen[static_cast<std::size_t>(r.exit)] = 1;
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            const auto& preds = cfg.nodes[static_cast<std::size_t>(node)].pred;
            if (next < preds.size()) {
                int p = preds[next++];
                if (!seen[static_cast<std::size_t>(p)]) {
                    seen[static_cast<std::size_t>(p)] = 1;
                    stack.emplace_back(p, 0);
                }
            } else {
                order[static_cast<std::size_t>(node)] = static_cast<int>(post.size());
                post.push_back(node);
                stack.pop_back();
            }
        }
    }

    auto intersect = [&](int a, int b) {
        while (a != b) {
            while (order[static_cast<std::size_t>(a)] < order[static_cast<std::size_t>(b)]) a = ipdom[static_cast<std::size_t>(a)];
            while (order[static_cast<std::size_t>(b)] < order[static_cast<std::size_t>(a)]) b = ipdom[static_cast<std::size_t>(b)];
        }
        return a;
    };

    ipdom[static_cast<std::size_t>(r.exit)] = r.exit;
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = post.rbegin(); it != post.rend(); ++it) {
            int b = *it;
            if (b == r.exit) continue;
            int candidate = -1;
            for (const auto& e : cfg.nodes[static_cast<std::size_t>(b)].succ) {
                if (ipdom[static_cast<std::size_t>(e.target)] == -1) continue;
                candidate = candidate == -1 ? e.target : intersect(e.target, candidate);
            }
            if (candidate != ipdom[static_cast<std::size_t>(b)]) {
                ipdom[static_cast<std::size_t>(b)] = candidate;
                changed = true;
            }
        }
    }
    ipdom[static_cast<std::size_t>(r.exit)] = -1;
    return ipdom;
}

namespace {

// True when every path from the region entry to `target` passes through the
// condition and leaves its most recent evaluation along `c.polarity`. Plain
// transitive control dependence can pair a loop's exit polarity with an
// inner break polarity; only conditions that are necessary on every path are
// kept so each listed outcome really held whenever the line runs.
bool must_hold(const Cfg& cfg, const Control& c, int target) {
    int cond = cfg.line_index.at(c.condition);
    const auto& region = cfg.regions[static_cast<std::size_t>(cfg.nodes[static_cast<std::size_t>(cond)].region)];
    std::vector<char> seen(cfg.nodes.size(), 0);
    std::vector<int> stack;
    auto push = [&](int n) {
        if (n == cond || seen[static_cast<std::size_t>(n)]) return;
        seen[static_cast<std::size_t>(n)] = 1;
        stack.push_back(n);
    };
    push(region.entry);
    for (const auto& e : cfg.nodes[static_cast<std::size_t>(cond)].succ) {
        if ((e.kind == EdgeKind::BranchTrue) != c.polarity) push(e.target);
    }
    while (!stack.empty()) {
        int n = stack.back();
        stack.pop_back();
        if (n == target) return false;
        for (const auto& e : cfg.nodes[static_cast<std::size_t>(n)].succ) push(e.target);
    }
    return true;
}

}  // namespace

Cdg build_cdg(const Cfg& cfg) {
    Cdg cdg;
    cdg.file = cfg.file;
    std::map<int, std::vector<Control>> immediate;

    for (std::size_t region = 0; region < cfg.regions.size(); ++region) {
        auto ipdom = post_dominators(cfg, static_cast<int>(region));
        for (int a : cfg.regions[region].nodes) {
            const auto& node = cfg.nodes[static_cast<std::size_t>(a)];
            if (node.succ.size() < 2) continue;
            for (const auto& e : node.succ) {
                bool polarity = e.kind == EdgeKind::BranchTrue;
                int stop = ipdom[static_cast<std::size_t>(a)];
                int runner = e.target;
                while (runner != -1 && runner != stop) {
                    const auto& dep = cfg.nodes[static_cast<std::size_t>(runner)];
                    if (dep.kind == NodeKind::Statement) {
                        auto& list = immediate[dep.line];
                        Control c{node.line, polarity};
                        if (std::find(list.begin(), list.end(), c) == list.end()) list.push_back(c);
                    }
                    runner = ipdom[static_cast<std::size_t>(runner)];
                }
            }
        }
    }

    for (const auto& node : cfg.nodes) {
        if (node.kind != NodeKind::Statement) continue;
        int line = node.line;
        int target_node = cfg.line_index.at(line);
        // Breadth-first over the chain; the nearest link fixes the polarity of each condition.
        std::vector<Control> result;
        std::set<int> seen_lines{line};
        std::deque<Control> queue;
        if (auto it = immediate.find(line); it != immediate.end()) queue.assign(it->second.begin(), it->second.end());
        while (!queue.empty()) {
            Control c = queue.front();
            queue.pop_front();
            if (!seen_lines.insert(c.condition).second) continue;
            if (must_hold(cfg, c, target_node)) result.push_back(c);
            if (auto it = immediate.find(c.condition); it != immediate.end()) {
                for (const auto& next : it->second) queue.push_back(next);
            }
        }
        std::sort(result.begin(), result.end(), [line](const Control& a, const Control& b) {
            int da = std::abs(a.condition - line);
            int db = std::abs(b.condition - line);
            if (da != db) return da < db;
            if (a.condition != b.condition) return a.condition < b.condition;
            return a.polarity > b.polarity;
        });
        cdg.controls[line] = std::move(result);
    }
    return cdg;
}

std::vector<Control> control_conditions(const Cdg& cdg, const SourceUnit& unit, int target) {
    if (unit.executable_lines.count(target) == 0) throw UnknownLine(unit.path, target);
    return cdg.of(target);
}

}  // namespace weaver
