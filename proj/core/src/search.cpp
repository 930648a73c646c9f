#include "sgm/search.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <sstream>

namespace sgm {

double promise_restart_score(std::size_t depth, std::size_t query_size, std::size_t explored,
                             std::size_t total_actions) {
    double depth_frac = query_size ? static_cast<double>(depth) / static_cast<double>(query_size) : 0;
    double explored_frac =
        total_actions ? static_cast<double>(explored) / static_cast<double>(total_actions) : 1.0;
    return (2.0 * depth_frac + (1.0 - explored_frac)) / 3.0;
}

std::vector<NodeId> local_candidates(const LabeledGraph& q, const LabeledGraph& G,
                                     const CandidateSets& C, std::span<const NodeId> mapped,
                                     std::span<const std::uint8_t> used, NodeId u_t) {
    // Matched neighbors of u_t pin target-side adjacency constraints.
    std::vector<NodeId> anchors;
    for (NodeId u2 : q.neighbors(u_t))
        if (mapped[u2] != kNoNode) anchors.push_back(mapped[u2]);

    std::vector<NodeId> out;
    const auto& cand = C.sets[u_t];
    if (anchors.empty()) {
        for (NodeId v : cand)
            if (!used[v]) out.push_back(v);
        return out;
    }

    // Iterate the smallest set among C(u_t) and the anchors' adjacency lists.
    std::size_t best_anchor = anchors.size();  // sentinel: iterate cand
    std::size_t best_size = cand.size();
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        if (G.degree(anchors[i]) < best_size) {
            best_size = G.degree(anchors[i]);
            best_anchor = i;
        }
    }

    auto feasible = [&](NodeId v) {
        if (used[v]) return false;
        for (NodeId a : anchors)
            if (!G.has_edge(v, a)) return false;
        return true;
    };

    if (best_anchor == anchors.size()) {
        for (NodeId v : cand)
            if (feasible(v)) out.push_back(v);
    } else {
        for (NodeId v : G.neighbors(anchors[best_anchor])) {
            if (!std::binary_search(cand.begin(), cand.end(), v)) continue;
            if (feasible(v)) out.push_back(v);
        }
    }
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Engine {
    const LabeledGraph& q;
    const LabeledGraph& G;
    const CandidateSets& C;
    const QueryOrder& order;
    Policy& policy;
    const SearchBudget& budget;
    bool keep_tree;

    SearchOutcome out;
    SearchTree tree;
    std::vector<NodeId> mapped;        // query node -> target or kNoNode
    std::vector<std::uint8_t> used;    // target node
    std::vector<std::size_t> path;     // node indices, root first
    std::vector<std::size_t> suspended;  // live nodes left behind by restarts
    std::size_t deadends_since_restart = 0;
    Clock::time_point start;

    Engine(const LabeledGraph& q_, const LabeledGraph& G_, const CandidateSets& C_,
           const QueryOrder& order_, Policy& policy_, const SearchBudget& budget_, bool keep)
        : q(q_), G(G_), C(C_), order(order_), policy(policy_), budget(budget_), keep_tree(keep) {}

    SearchTreeNode& node(std::size_t i) { return tree.nodes[i]; }

    bool live(std::size_t i) { return node(i).explored < node(i).actions.size(); }

    bool over_budget() {
        if (budget.max_steps && out.steps >= budget.max_steps) return true;
        if (budget.wall_seconds > 0) {
            double s = std::chrono::duration<double>(Clock::now() - start).count();
            if (s >= budget.wall_seconds) return true;
        }
        return false;
    }

    StateView view(std::size_t depth) const {
        return StateView{q, G, C, order, mapped, used, depth};
    }

    std::vector<NodeId> ordered_actions(std::size_t depth) {
        NodeId u = order.order[depth];
        auto acts = local_candidates(q, G, C, mapped, used, u);
        if (acts.size() > 1) policy.order_actions(view(depth), u, acts);
        return acts;
    }

    void assign(std::size_t depth, NodeId v) {
        mapped[order.order[depth]] = v;
        used[v] = 1;
    }
    void unassign(std::size_t depth, NodeId v) {
        mapped[order.order[depth]] = kNoNode;
        used[v] = 0;
    }

    void record_match(std::size_t parent_idx, NodeId v) {
        out.matches.emplace_back(mapped.begin(), mapped.end());
        if (out.first_solution_ms < 0) {
            out.first_solution_ms =
                std::chrono::duration<double, std::milli>(Clock::now() - start).count();
            out.first_solution_steps = out.steps;
        }
        if (keep_tree) {
            tree.nodes.push_back(SearchTreeNode{static_cast<std::int64_t>(parent_idx), v,
                                                static_cast<std::uint32_t>(q.num_nodes()),
                                                {},
                                                0,
                                                true});
            tree.solution_leaves.push_back(tree.nodes.size() - 1);
        }
    }

    // Index into `path` of the dead node's deepest live ancestor, or npos.
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t deepest_live_on_path() {
        for (std::size_t i = path.size(); i-- > 0;)
            if (live(path[i])) return i;
        return npos;
    }

    // Picks the restart target among live path nodes by promise score.
    // Ties: deepest, then most recently created.
    std::size_t promising_on_path() {
        std::size_t best = npos;
        double best_score = 0;
        for (std::size_t i = 0; i < path.size(); ++i) {
            std::size_t ni = path[i];
            if (!live(ni)) continue;
            double s = promise_restart_score(node(ni).depth, q.num_nodes(), node(ni).explored,
                                             node(ni).actions.size());
            if (budget.promise_minimize) s = -s;
            if (best == npos || s > best_score ||
                (s == best_score && (node(ni).depth > node(path[best]).depth ||
                                     (node(ni).depth == node(path[best]).depth && ni > path[best])))) {
                best = i;
                best_score = s;
            }
        }
        return best;
    }

    // Drops path entries above `keep_upto` (inclusive index into path),
    // suspending any that still have unexplored actions.
    void pop_path_to(std::size_t keep_upto) {
        while (path.size() > keep_upto + 1) {
            std::size_t ni = path.back();
            path.pop_back();
            if (node(ni).depth > 0) unassign(node(ni).depth - 1, node(ni).v);
            if (live(ni)) suspended.push_back(ni);
        }
    }

    // Rebuilds the current mapping so `target` becomes the path tip.
    void switch_to(std::size_t target) {
        std::vector<std::size_t> chain;
        for (std::int64_t i = static_cast<std::int64_t>(target); i >= 0; i = node(i).parent)
            chain.push_back(static_cast<std::size_t>(i));
        std::reverse(chain.begin(), chain.end());
        path = std::move(chain);
        std::fill(mapped.begin(), mapped.end(), kNoNode);
        std::fill(used.begin(), used.end(), 0);
        for (std::size_t ni : path)
            if (node(ni).depth > 0) assign(node(ni).depth - 1, node(ni).v);
    }

    // Handles a dead end at the path tip. Returns false when the whole tree is
    // exhausted.
    bool on_dead_end() {
        ++out.dead_ends;
        ++deadends_since_restart;

        std::size_t plain = deepest_live_on_path();
        std::size_t target = plain;
        bool restart_ok = budget.enable_restarts &&
                          (budget.restart_budget == 0 || out.restarts < budget.restart_budget) &&
                          deadends_since_restart >= std::max<std::size_t>(budget.restart_threshold, 1);
        if (restart_ok && plain != npos) {
            std::size_t scored = promising_on_path();
            if (scored != npos && scored != plain) {
                target = scored;
                ++out.restarts;
                deadends_since_restart = 0;
            }
        }

        if (target != npos) {
            pop_path_to(target);
            return true;
        }

        // Path fully exhausted: fall back to the most recent live suspended node.
        pop_path_to(0);
        path.clear();
        while (!suspended.empty()) {
            std::size_t ni = suspended.back();
            suspended.pop_back();
            if (!live(ni)) continue;
            switch_to(ni);
            return true;
        }
        return false;
    }

    SearchOutcome run() {
        start = Clock::now();
        mapped.assign(q.num_nodes(), kNoNode);
        used.assign(G.num_nodes(), 0);

        if (C.any_empty() || budget.solution_cap == 0) {
            if (keep_tree) out.tree = std::make_unique<SearchTree>(std::move(tree));
            return std::move(out);
        }

        tree.nodes.push_back(SearchTreeNode{});
        node(0).actions = ordered_actions(0);
        path.push_back(0);

        const std::size_t full = q.num_nodes();
        while (!path.empty()) {
            if (over_budget()) {
                out.budget_exhausted = true;
                break;
            }
            std::size_t cur = path.back();
            SearchTreeNode& n = node(cur);
            if (n.explored >= n.actions.size()) {
                if (!on_dead_end()) break;
                continue;
            }
            NodeId v = n.actions[n.explored++];
            std::size_t depth = n.depth;
            ++out.steps;
            assign(depth, v);
            out.max_depth = std::max(out.max_depth, depth + 1);

            if (depth + 1 == full) {
                record_match(cur, v);
                unassign(depth, v);
                if (out.matches.size() >= budget.solution_cap) break;
                continue;
            }

            tree.nodes.push_back(SearchTreeNode{static_cast<std::int64_t>(cur), v,
                                                static_cast<std::uint32_t>(depth + 1)});
            std::size_t child = tree.nodes.size() - 1;
            node(child).actions = ordered_actions(depth + 1);
            if (node(child).actions.empty()) {
                unassign(depth, v);
                if (!on_dead_end()) break;
            } else {
                path.push_back(child);
            }
        }

        if (keep_tree) out.tree = std::make_unique<SearchTree>(std::move(tree));
        return std::move(out);
    }
};

}  // namespace

SearchOutcome backtracking_search(const LabeledGraph& q, const LabeledGraph& G,
                                  const CandidateSets& C, const QueryOrder& order, Policy& policy,
                                  const SearchBudget& budget, bool collect_tree) {
    Engine eng(q, G, C, order, policy, budget, collect_tree);
    return eng.run();
}

std::string format_search_output(const SearchOutcome& outcome, bool virtual_time) {
    std::ostringstream os;
    for (const auto& m : outcome.matches) {
        os << 'M';
        for (std::size_t u = 0; u < m.size(); ++u) os << ' ' << u << ':' << m[u];
        os << '\n';
    }
    long long first_ms = -1;
    if (outcome.solved())
        first_ms = virtual_time ? static_cast<long long>(outcome.first_solution_steps)
                                : static_cast<long long>(outcome.first_solution_ms);
    os << "S " << outcome.steps << ' ' << first_ms << ' ' << outcome.matches.size() << '\n';
    return os.str();
}

}  // namespace sgm
