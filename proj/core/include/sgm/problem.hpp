#pragma once

#include <memory>

#include "sgm/filter.hpp"
#include "sgm/graph.hpp"
#include "sgm/ordering.hpp"

namespace sgm {

/// One (query, target) instance with its filtered candidates and match order.
struct SearchProblem {
    std::shared_ptr<const LabeledGraph> target;
    LabeledGraph query;
    CandidateSets candidates;
    QueryOrder order;

    /// Runs the standard pipeline: label/degree filter, neighbor-label
    /// refinement, least-candidates order.
    static SearchProblem build(std::shared_ptr<const LabeledGraph> target, LabeledGraph query);
};

}  // namespace sgm
