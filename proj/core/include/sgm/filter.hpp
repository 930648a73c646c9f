#pragma once

#include <vector>

#include "sgm/graph.hpp"

namespace sgm {

/// Global candidate map C: per query node u, the sorted set of target nodes u
/// may legally map to. Filters never cross labels.
struct CandidateSets {
    std::vector<std::vector<NodeId>> sets;

    const std::vector<NodeId>& of(NodeId u) const { return sets[u]; }
    bool any_empty() const {
        for (const auto& s : sets)
            if (s.empty()) return true;
        return false;
    }
};

/// Label-and-degree filter: C(u) = { v : L(v) = L(u) and deg(v) >= deg(u) }.
CandidateSets ldf_filter(const LabeledGraph& q, const LabeledGraph& G);

/// Neighbor-label-frequency refinement: keeps v in base(u) iff for every label
/// l, v has at least as many l-labeled neighbors as u does.
CandidateSets nlf_filter(const LabeledGraph& q, const LabeledGraph& G, const CandidateSets& base);

}  // namespace sgm
