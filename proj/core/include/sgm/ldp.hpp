#pragma once

#include <array>
#include <vector>

#include "sgm/graph.hpp"

namespace sgm {

inline constexpr std::size_t kLdpDim = 5;
inline constexpr std::size_t kInitialEncodingDim = kLdpDim + 2;

/// Local degree profile: (deg, min, max, mean, population std of neighbor
/// degrees). All zeros for an isolated node.
std::array<double, kLdpDim> ldp_features(const LabeledGraph& g, NodeId u);

/// Per-node 7-real initial encodings: LDP followed by a selected-flag one-hot,
/// (1,0) = unselected, (0,1) = selected. Row-major, num_nodes x 7. Labels are
/// deliberately not encoded; candidate sets enforce label constraints.
std::vector<double> initial_encoding(const LabeledGraph& g, std::span<const NodeId> selected);

}  // namespace sgm
