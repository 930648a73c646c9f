#include "sgm/context.hpp"

#include <algorithm>

#include "sgm/search.hpp"

namespace sgm {

std::vector<std::vector<NodeId>> StateContext::reverse_for(std::span<const NodeId> targets) const {
    std::vector<std::vector<NodeId>> rev(targets.size());
    std::vector<std::int64_t> row_of;
    NodeId max_t = 0;
    for (NodeId t : targets) max_t = std::max(max_t, t);
    row_of.assign(max_t + 1, -1);
    for (std::size_t i = 0; i < targets.size(); ++i) row_of[targets[i]] = static_cast<std::int64_t>(i);

    for (NodeId u = 0; u < matched.size(); ++u) {
        for (NodeId v : union_of(u)) {
            if (v <= max_t && row_of[v] >= 0) rev[static_cast<std::size_t>(row_of[v])].push_back(u);
        }
    }
    return rev;
}

StateContext build_state_context(const LabeledGraph& q, const LabeledGraph& G,
                                 const CandidateSets& C, std::span<const NodeId> mapped,
                                 std::span<const std::uint8_t> used) {
    StateContext ctx;
    ctx.matched.assign(mapped.begin(), mapped.end());
    ctx.future.resize(q.num_nodes());
    for (NodeId u = 0; u < q.num_nodes(); ++u) {
        if (mapped[u] != kNoNode) {
            ++ctx.depth;
            continue;
        }
        ctx.future[u] = local_candidates(q, G, C, mapped, used, u);
    }
    return ctx;
}

}  // namespace sgm
