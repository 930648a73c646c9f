#pragma once

#include <memory>

#include "sgm/problem.hpp"
#include "sgm/search.hpp"

namespace sgm {

/// A (query node, target node) pair tagged with the look-ahead offset k of the
/// state it was taken from.
struct PairTag {
    NodeId u;
    NodeId v;
    std::uint32_t k;
};

/// One search state on a solution path together with its training pairs.
/// Positives are the pairs chosen at this state and at every future state of
/// every solution-reaching sequence through it (a multiset: shared prefixes
/// count once per sequence). Negatives are filled by sample_negatives.
struct TrainingSample {
    std::shared_ptr<const SearchProblem> problem;
    std::vector<NodeId> mapped;   // per query node; kNoNode if unmatched
    std::uint32_t depth = 0;
    NodeId u_t = kNoNode;
    std::vector<NodeId> actions;  // action space A at this state
    std::vector<PairTag> positives;
    std::vector<PairTag> negatives;
    std::vector<PairTag> fallback_pool;  // non-positive future actions (bounded)
};

/// Walks every solution path of a retained search tree and emits one sample
/// per state on such a path. Returns an empty list when the tree holds no
/// solution.
std::vector<TrainingSample> collect_training_signals(const SearchTree& tree,
                                                     std::shared_ptr<const SearchProblem> problem);

/// Draws |positives| negatives uniformly from this state's action space,
/// excluding the offset-0 positives; falls back to the non-positive pool of
/// future states when that empties. Returns the number drawn (can be short
/// only when both pools are empty).
std::size_t sample_negatives(TrainingSample& sample, std::uint64_t seed);

}  // namespace sgm
