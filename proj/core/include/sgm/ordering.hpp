#pragma once

#include <vector>

#include "sgm/filter.hpp"
#include "sgm/graph.hpp"

namespace sgm {

/// Matching order over the query nodes. Every node after the first has at
/// least one neighbor earlier in the order.
struct QueryOrder {
    std::vector<NodeId> order;          // position -> query node
    std::vector<std::uint32_t> position;  // query node -> position
};

/// Least-candidates-first greedy order: start at the node with the smallest
/// candidate set, then repeatedly append the frontier node with the smallest
/// set. Ties break toward higher degree, then lower node id.
/// Throws std::invalid_argument if q is disconnected.
QueryOrder order_query_nodes(const LabeledGraph& q, const CandidateSets& C);

}  // namespace sgm
