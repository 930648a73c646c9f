#pragma once

#include <vector>

#include "sgm/graph.hpp"

namespace sgm {

/// Exhaustive referee: enumerates every injective label-preserving assignment
/// (label buckets only, no other pruning) and keeps those verify_match
/// accepts. Matches come out in lexicographic order by query node id.
/// Intended for |V_q| <= 8 and |V_G| <= 20; larger inputs emit a warning to
/// stderr but still run.
std::vector<std::vector<NodeId>> brute_force_oracle(const LabeledGraph& q, const LabeledGraph& G);

}  // namespace sgm
