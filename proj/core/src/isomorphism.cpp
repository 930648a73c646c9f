#include "sgm/isomorphism.hpp"

#include <algorithm>
#include <vector>

namespace sgm {

namespace {

// Visit order that keeps every node after the first in its component adjacent
// to an earlier one, so edge constraints bind as early as possible.
std::vector<NodeId> bfs_order(const LabeledGraph& g) {
    std::vector<NodeId> order;
    std::vector<std::uint8_t> seen(g.num_nodes(), 0);
    for (std::size_t s = 0; s < g.num_nodes(); ++s) {
        if (seen[s]) continue;
        seen[s] = 1;
        std::size_t head = order.size();
        order.push_back(static_cast<NodeId>(s));
        while (head < order.size()) {
            NodeId u = order[head++];
            for (NodeId v : g.neighbors(u))
                if (!seen[v]) {
                    seen[v] = 1;
                    order.push_back(v);
                }
        }
    }
    return order;
}

bool extend(const LabeledGraph& g1, const LabeledGraph& g2, const std::vector<NodeId>& order,
            std::size_t pos, std::vector<NodeId>& map, std::vector<std::uint8_t>& used) {
    if (pos == order.size()) return true;
    NodeId u = order[pos];
    for (std::size_t v = 0; v < g2.num_nodes(); ++v) {
        if (used[v]) continue;
        if (g2.label(static_cast<NodeId>(v)) != g1.label(u)) continue;
        if (g2.degree(static_cast<NodeId>(v)) != g1.degree(u)) continue;
        bool ok = true;
        for (NodeId w : g1.neighbors(u)) {
            if (map[w] != kNoNode && !g2.has_edge(static_cast<NodeId>(v), map[w])) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        map[u] = static_cast<NodeId>(v);
        used[v] = 1;
        if (extend(g1, g2, order, pos + 1, map, used)) return true;
        map[u] = kNoNode;
        used[v] = 0;
    }
    return false;
}

}  // namespace

bool isomorphic_check(const LabeledGraph& g1, const LabeledGraph& g2) {
    if (g1.num_nodes() != g2.num_nodes() || g1.num_edges() != g2.num_edges()) return false;

    auto signature = [](const LabeledGraph& g) {
        std::vector<std::pair<Label, std::size_t>> sig(g.num_nodes());
        for (std::size_t u = 0; u < g.num_nodes(); ++u)
            sig[u] = {g.label(static_cast<NodeId>(u)), g.degree(static_cast<NodeId>(u))};
        std::sort(sig.begin(), sig.end());
        return sig;
    };
    if (signature(g1) != signature(g2)) return false;

    auto order = bfs_order(g1);
    std::vector<NodeId> map(g1.num_nodes(), kNoNode);
    std::vector<std::uint8_t> used(g2.num_nodes(), 0);
    return extend(g1, g2, order, 0, map, used);
}

}  // namespace sgm
