#pragma once

#include <span>

#include "sgm/graph.hpp"

namespace sgm {

/// Independent match checker: true iff mapping is total on V_q, injective,
/// label preserving, and maps every query edge onto a target edge. Shares no
/// code with the search path so it can referee it.
bool verify_match(const LabeledGraph& q, const LabeledGraph& G, std::span<const NodeId> mapping);

}  // namespace sgm
