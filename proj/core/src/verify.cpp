#include "sgm/verify.hpp"

#include <vector>

namespace sgm {

bool verify_match(const LabeledGraph& q, const LabeledGraph& G, std::span<const NodeId> mapping) {
    if (mapping.size() != q.num_nodes()) return false;
    std::vector<std::uint8_t> used(G.num_nodes(), 0);
    for (std::size_t u = 0; u < q.num_nodes(); ++u) {
        NodeId v = mapping[u];
        if (v == kNoNode || v >= G.num_nodes()) return false;
        if (used[v]) return false;  // not injective
        used[v] = 1;
        if (G.label(v) != q.label(static_cast<NodeId>(u))) return false;
    }
    for (std::size_t u = 0; u < q.num_nodes(); ++u)
        for (NodeId w : q.neighbors(static_cast<NodeId>(u)))
            if (u < w && !G.has_edge(mapping[u], mapping[w])) return false;
    return true;
}

}  // namespace sgm
