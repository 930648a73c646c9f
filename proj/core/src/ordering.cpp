#include "sgm/ordering.hpp"

namespace sgm {

QueryOrder order_query_nodes(const LabeledGraph& q, const CandidateSets& C) {
    const std::size_t n = q.num_nodes();
    if (n == 0) throw std::invalid_argument("empty query");

    // (candidate count asc, degree desc, id asc)
    auto better = [&](NodeId a, NodeId b) {
        if (C.sets[a].size() != C.sets[b].size()) return C.sets[a].size() < C.sets[b].size();
        if (q.degree(a) != q.degree(b)) return q.degree(a) > q.degree(b);
        return a < b;
    };

    std::vector<std::uint8_t> placed(n, 0), frontier(n, 0);
    QueryOrder out;
    out.order.reserve(n);
    out.position.assign(n, 0);

    NodeId first = 0;
    for (NodeId u = 1; u < n; ++u)
        if (better(u, first)) first = u;
    out.order.push_back(first);
    placed[first] = 1;
    for (NodeId v : q.neighbors(first)) frontier[v] = 1;

    while (out.order.size() < n) {
        NodeId pick = kNoNode;
        for (NodeId u = 0; u < n; ++u) {
            if (placed[u] || !frontier[u]) continue;
            if (pick == kNoNode || better(u, pick)) pick = u;
        }
        if (pick == kNoNode) throw std::invalid_argument("query graph is disconnected");
        out.order.push_back(pick);
        placed[pick] = 1;
        for (NodeId v : q.neighbors(pick))
            if (!placed[v]) frontier[v] = 1;
    }
    for (std::uint32_t i = 0; i < n; ++i) out.position[out.order[i]] = i;
    return out;
}

}  // namespace sgm
