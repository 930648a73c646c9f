#pragma once

#include <span>
#include <vector>

#include "sgm/filter.hpp"
#include "sgm/graph.hpp"

namespace sgm {

/// Search-state candidate structure driving cross-graph message passing.
/// The matched map and the future-candidate map partition the query nodes;
/// their union is the pair set messages flow over.
struct StateContext {
    std::vector<NodeId> matched;              // per query node; kNoNode if unmatched
    std::vector<std::vector<NodeId>> future;  // per query node; empty when matched
    std::size_t depth = 0;

    bool is_matched(NodeId u) const { return matched[u] != kNoNode; }

    /// Pair targets of u under the union map.
    std::span<const NodeId> union_of(NodeId u) const {
        if (matched[u] != kNoNode) return {&matched[u], 1};
        return future[u];
    }

    /// Reverse union map restricted to the given target nodes: for each
    /// targets[i], the ascending list of query nodes mapping to it.
    std::vector<std::vector<NodeId>> reverse_for(std::span<const NodeId> targets) const;
};

/// Evaluates the same local-candidate routine the search uses for every
/// unmatched query node, so the context is exactly the search's action space.
StateContext build_state_context(const LabeledGraph& q, const LabeledGraph& G,
                                 const CandidateSets& C, std::span<const NodeId> mapped,
                                 std::span<const std::uint8_t> used);

}  // namespace sgm
