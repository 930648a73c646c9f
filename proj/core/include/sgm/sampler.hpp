#pragma once

#include <cstdint>

#include "sgm/graph.hpp"

namespace sgm {

/// Thrown when the walk cannot grow a query of the requested size.
struct SampleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A query sampled from a target graph together with the ground-truth match.
struct SampledQuery {
    LabeledGraph query;
    std::vector<NodeId> truth_mapping;  // query node id -> target node id
    double p_value = 0;
    std::uint64_t seed = 0;
};

/// Log-uniform sweep from 0.001 to 1000: p_i = 0.001 * exp(ln(1e6)/(n-1)*(i-1)).
/// i is 1-based; requires n >= 2 and 1 <= i <= n.
double p_schedule(std::size_t i, std::size_t n);

/// Grows an n-node connected node set by a revisit-biased random walk from a
/// uniformly random start. At each step the next node is drawn from the
/// current node's neighbors with raw weight 1/p if already selected and p
/// otherwise. Small p yields star-like queries, large p path-like ones.
/// Query edges are all target edges among the selected nodes; node ids follow
/// selection order. Retries from a fresh start up to 100 times before failing.
SampledQuery random_walk_sample(const LabeledGraph& target, std::size_t n, double p,
                                std::uint64_t seed);

}  // namespace sgm
