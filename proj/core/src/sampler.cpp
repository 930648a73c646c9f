#include "sgm/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "sgm/rng.hpp"

namespace sgm {

double p_schedule(std::size_t i, std::size_t n) {
    if (n < 2) throw std::invalid_argument("p_schedule requires n >= 2");
    if (i < 1 || i > n) throw std::invalid_argument("p_schedule index out of range");
    // 0.001 * exp(ln(1e6)/(n-1)*(i-1)); the pow form lands the sweep endpoints
    // on exactly 0.001 and 1000.
    return 0.001 * std::pow(1e6, static_cast<double>(i - 1) / static_cast<double>(n - 1));
}

SampledQuery random_walk_sample(const LabeledGraph& target, std::size_t n, double p,
                                std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("query size must be >= 1");
    if (!(p > 0)) throw std::invalid_argument("p must be positive");
    if (n > target.num_nodes()) throw SampleError("query larger than target");

    constexpr int kMaxRestarts = 100;
    // Expected steps per growth scale like 1/p^2 when p is small; cap each
    // attempt generously so pathological components still fail in finite time.
    const std::size_t cap =
        256 + n * static_cast<std::size_t>(std::ceil(8.0 / std::min(1.0, p * p)));

    Rng rng(seed);
    std::vector<std::uint8_t> selected_flag(target.num_nodes(), 0);
    std::vector<NodeId> order;
    std::vector<double> weights;

    for (int attempt = 0; attempt < kMaxRestarts; ++attempt) {
        std::fill(selected_flag.begin(), selected_flag.end(), 0);
        order.clear();
        NodeId cur = static_cast<NodeId>(rng.below(target.num_nodes()));
        selected_flag[cur] = 1;
        order.push_back(cur);

        std::size_t steps = 0;
        while (order.size() < n && steps < cap) {
            auto nbrs = target.neighbors(cur);
            if (nbrs.empty()) break;  // isolated start, cannot grow
            weights.resize(nbrs.size());
            for (std::size_t i = 0; i < nbrs.size(); ++i)
                weights[i] = selected_flag[nbrs[i]] ? 1.0 / p : p;
            NodeId next = nbrs[rng.weighted_pick(weights)];
            if (!selected_flag[next]) {
                selected_flag[next] = 1;
                order.push_back(next);
            }
            cur = next;
            ++steps;
        }
        if (order.size() < n) continue;

        std::vector<NodeId> query_id_of(target.num_nodes(), kNoNode);
        std::vector<Label> labels(n);
        for (std::size_t qi = 0; qi < n; ++qi) {
            query_id_of[order[qi]] = static_cast<NodeId>(qi);
            labels[qi] = target.label(order[qi]);
        }
        std::vector<std::pair<NodeId, NodeId>> edges;
        for (std::size_t qi = 0; qi < n; ++qi)
            for (NodeId w : target.neighbors(order[qi]))
                if (query_id_of[w] != kNoNode && order[qi] < w)
                    edges.emplace_back(static_cast<NodeId>(qi), query_id_of[w]);

        SampledQuery out;
        out.query = LabeledGraph::from_edges(n, std::move(labels), edges);
        out.truth_mapping = order;
        out.p_value = p;
        out.seed = seed;
        return out;
    }
    throw SampleError("random walk failed to reach " + std::to_string(n) + " nodes after " +
                      std::to_string(kMaxRestarts) + " restarts");
}

}  // namespace sgm
