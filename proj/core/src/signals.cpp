#include "sgm/signals.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "sgm/rng.hpp"

namespace sgm {

namespace {

constexpr std::size_t kFallbackCap = 256;

std::uint64_t pack(NodeId u, NodeId v, std::uint32_t k) {
    return (static_cast<std::uint64_t>(u) << 40) | (static_cast<std::uint64_t>(v) << 8) |
           (k & 0xff);
}

}  // namespace

SearchProblem SearchProblem::build(std::shared_ptr<const LabeledGraph> target,
                                   LabeledGraph query) {
    SearchProblem p;
    p.target = std::move(target);
    p.query = std::move(query);
    p.candidates = nlf_filter(p.query, *p.target, ldf_filter(p.query, *p.target));
    p.order = order_query_nodes(p.query, p.candidates);
    return p;
}

std::vector<TrainingSample> collect_training_signals(
    const SearchTree& tree, std::shared_ptr<const SearchProblem> problem) {
    const auto& order = problem->order.order;
    const std::size_t nq = order.size();

    // node index -> sample under construction
    std::unordered_map<std::size_t, std::size_t> sample_of;
    std::vector<TrainingSample> samples;
    std::vector<std::unordered_set<std::uint64_t>> seen_pos;  // parallel to samples

    for (std::size_t leaf : tree.solution_leaves) {
        // Chain of tree nodes from root to the solution, then the chosen pairs.
        std::vector<std::size_t> chain;
        for (std::int64_t i = static_cast<std::int64_t>(leaf); i >= 0; i = tree.nodes[i].parent)
            chain.push_back(static_cast<std::size_t>(i));
        std::reverse(chain.begin(), chain.end());
        const std::size_t T = chain.size() - 1;  // number of chosen pairs
        if (T != nq) continue;                   // defensive; solutions are full matches

        for (std::size_t t = 0; t < T; ++t) {
            std::size_t state_node = chain[t];
            auto it = sample_of.find(state_node);
            if (it == sample_of.end()) {
                TrainingSample s;
                s.problem = problem;
                s.depth = tree.nodes[state_node].depth;
                s.u_t = order[s.depth];
                s.actions = tree.nodes[state_node].actions;
                s.mapped.assign(nq, kNoNode);
                for (std::size_t j = 1; j <= t; ++j)
                    s.mapped[order[tree.nodes[chain[j]].depth - 1]] = tree.nodes[chain[j]].v;
                samples.push_back(std::move(s));
                seen_pos.emplace_back();
                it = sample_of.emplace(state_node, samples.size() - 1).first;
            }
            TrainingSample& s = samples[it->second];
            for (std::size_t k = 0; t + k < T; ++k) {
                NodeId u = order[tree.nodes[chain[t + k + 1]].depth - 1];
                NodeId v = tree.nodes[chain[t + k + 1]].v;
                s.positives.push_back(PairTag{u, v, static_cast<std::uint32_t>(k)});
                seen_pos[it->second].insert(pack(u, v, static_cast<std::uint32_t>(k)));
            }
        }
    }

    // Fallback pools: non-positive actions of future states along solution
    // paths, bounded per sample.
    for (std::size_t leaf : tree.solution_leaves) {
        std::vector<std::size_t> chain;
        for (std::int64_t i = static_cast<std::int64_t>(leaf); i >= 0; i = tree.nodes[i].parent)
            chain.push_back(static_cast<std::size_t>(i));
        std::reverse(chain.begin(), chain.end());
        const std::size_t T = chain.size() - 1;
        if (T != nq) continue;
        for (std::size_t t = 0; t < T; ++t) {
            auto it = sample_of.find(chain[t]);
            if (it == sample_of.end()) continue;
            TrainingSample& s = samples[it->second];
            if (s.fallback_pool.size() >= kFallbackCap) continue;
            const auto& pos = seen_pos[it->second];
            for (std::size_t k = 1; t + k < T && s.fallback_pool.size() < kFallbackCap; ++k) {
                std::size_t future_node = chain[t + k];
                NodeId u = order[tree.nodes[future_node].depth];
                for (NodeId v : tree.nodes[future_node].actions) {
                    if (pos.count(pack(u, v, static_cast<std::uint32_t>(k)))) continue;
                    s.fallback_pool.push_back(PairTag{u, v, static_cast<std::uint32_t>(k)});
                    if (s.fallback_pool.size() >= kFallbackCap) break;
                }
            }
        }
    }
    return samples;
}

std::size_t sample_negatives(TrainingSample& sample, std::uint64_t seed) {
    sample.negatives.clear();
    const std::size_t want = sample.positives.size();
    if (want == 0) return 0;

    std::unordered_set<NodeId> pos_now;
    for (const auto& p : sample.positives)
        if (p.k == 0) pos_now.insert(p.v);

    std::vector<NodeId> pool;
    for (NodeId v : sample.actions)
        if (!pos_now.count(v)) pool.push_back(v);

    Rng rng(Rng::mix(seed, (static_cast<std::uint64_t>(sample.depth) << 32) ^ sample.u_t));
    if (!pool.empty()) {
        for (std::size_t i = 0; i < want; ++i)
            sample.negatives.push_back(
                PairTag{sample.u_t, pool[rng.below(pool.size())], 0});
    } else if (!sample.fallback_pool.empty()) {
        for (std::size_t i = 0; i < want; ++i)
            sample.negatives.push_back(sample.fallback_pool[rng.below(sample.fallback_pool.size())]);
    }
    return sample.negatives.size();
}

}  // namespace sgm
