#pragma once

#include <optional>

#include "sgm/graph.hpp"
#include "sgm/rng.hpp"
#include "sgm/sampler.hpp"

namespace sgm::testsupport {

/// Erdos-Renyi-style labeled graph.
inline LabeledGraph er_graph(std::size_t n, double avg_deg, int num_labels, std::uint64_t seed) {
    Rng rng(seed);
    double p = n > 1 ? std::min(1.0, avg_deg / static_cast<double>(n - 1)) : 0.0;
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId a = 0; a < n; ++a)
        for (NodeId b = a + 1; b < n; ++b)
            if (rng.next_double() < p) edges.emplace_back(a, b);
    std::vector<Label> labels(n);
    for (auto& l : labels) l = static_cast<Label>(rng.below(num_labels));
    return LabeledGraph::from_edges(n, std::move(labels), edges);
}

/// Preferential-attachment graph: each new node attaches to `m` distinct
/// existing nodes drawn with probability proportional to degree + 1.
inline LabeledGraph ba_graph(std::size_t n, std::size_t m, int num_labels, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::pair<NodeId, NodeId>> edges;
    std::vector<std::size_t> deg(n, 0);
    std::size_t seed_nodes = m + 1;
    for (NodeId a = 0; a < seed_nodes; ++a)
        for (NodeId b = a + 1; b < seed_nodes; ++b) {
            edges.emplace_back(a, b);
            ++deg[a];
            ++deg[b];
        }
    std::vector<double> w;
    for (NodeId v = static_cast<NodeId>(seed_nodes); v < n; ++v) {
        std::vector<std::uint8_t> chosen(v, 0);
        for (std::size_t e = 0; e < m; ++e) {
            w.assign(v, 0.0);
            double total = 0;
            for (NodeId u = 0; u < v; ++u) {
                if (chosen[u]) continue;
                w[u] = static_cast<double>(deg[u] + 1);
                total += w[u];
            }
            if (total == 0) break;
            NodeId pick = static_cast<NodeId>(rng.weighted_pick(w));
            chosen[pick] = 1;
            edges.emplace_back(pick, v);
            ++deg[pick];
            ++deg[v];
        }
    }
    std::vector<Label> labels(n);
    for (auto& l : labels) l = static_cast<Label>(rng.below(num_labels));
    return LabeledGraph::from_edges(n, std::move(labels), edges);
}

struct CorpusPair {
    LabeledGraph query;
    LabeledGraph target;
    bool sampled_from_target = false;
};

/// Small seeded (query, target) pair: targets have 6..15 nodes and at most 3
/// labels, queries 2..6 nodes. Even indices sample the query from the target
/// (guaranteed solvable); odd indices draw an independent connected query.
inline CorpusPair corpus_pair(std::size_t index, std::uint64_t base_seed = 0x5eedc0de) {
    std::uint64_t seed = Rng::mix(base_seed, index);
    Rng rng(seed);
    int sigma = 1 + static_cast<int>(index % 3);
    std::size_t ng = 6 + rng.below(10);
    std::size_t nq = 2 + rng.below(5);

    CorpusPair out;
    out.target = er_graph(ng, 2.0 + rng.next_double() * 2.0, sigma, Rng::mix(seed, 1));

    for (std::uint64_t attempt = 0;; ++attempt) {
        if (index % 2 == 0) {
            try {
                out.query =
                    random_walk_sample(out.target, nq, 1.0, Rng::mix(seed, 100 + attempt)).query;
                out.sampled_from_target = true;
                break;
            } catch (const SampleError&) {
                // fall through to an independent query
            }
        }
        LabeledGraph q = er_graph(nq, 2.5, sigma, Rng::mix(seed, 200 + attempt));
        if (q.connected()) {
            out.query = std::move(q);
            break;
        }
    }
    return out;
}

}  // namespace sgm::testsupport
