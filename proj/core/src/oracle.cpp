#include "sgm/oracle.hpp"

#include <iostream>

#include "sgm/verify.hpp"

namespace sgm {

namespace {

void enumerate(const LabeledGraph& q, const LabeledGraph& G,
               const std::vector<std::vector<NodeId>>& buckets, std::size_t u,
               std::vector<NodeId>& map, std::vector<std::uint8_t>& used,
               std::vector<std::vector<NodeId>>& out) {
    if (u == q.num_nodes()) {
        if (verify_match(q, G, map)) out.push_back(map);
        return;
    }
    for (NodeId v : buckets[u]) {
        if (used[v]) continue;
        map[u] = v;
        used[v] = 1;
        enumerate(q, G, buckets, u + 1, map, used, out);
        used[v] = 0;
    }
    map[u] = kNoNode;
}

}  // namespace

std::vector<std::vector<NodeId>> brute_force_oracle(const LabeledGraph& q, const LabeledGraph& G) {
    if (q.num_nodes() > 8 || G.num_nodes() > 20)
        std::cerr << "warning: brute_force_oracle on " << q.num_nodes() << "x" << G.num_nodes()
                  << " nodes may be slow\n";

    std::vector<std::vector<NodeId>> buckets(q.num_nodes());
    for (std::size_t u = 0; u < q.num_nodes(); ++u)
        for (std::size_t v = 0; v < G.num_nodes(); ++v)
            if (G.label(static_cast<NodeId>(v)) == q.label(static_cast<NodeId>(u)))
                buckets[u].push_back(static_cast<NodeId>(v));

    std::vector<std::vector<NodeId>> out;
    std::vector<NodeId> map(q.num_nodes(), kNoNode);
    std::vector<std::uint8_t> used(G.num_nodes(), 0);
    enumerate(q, G, buckets, 0, map, used, out);
    return out;
}

}  // namespace sgm
