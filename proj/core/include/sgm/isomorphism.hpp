#pragma once

#include "sgm/graph.hpp"

namespace sgm {

/// Labeled-graph isomorphism for query-scale graphs (<= ~128 nodes).
/// Quick rejection on (|V|, |E|, label multiset, degree sequence), then a
/// backtracking search for a non-induced match of g1 into g2; with equal node
/// and edge counts such a match is an isomorphism.
bool isomorphic_check(const LabeledGraph& g1, const LabeledGraph& g2);

}  // namespace sgm
