#pragma once

#include <cstdint>

#include "sgm/model.hpp"
#include "sgm/rng.hpp"
#include "sgm/search.hpp"

namespace sgm {

/// Seeded shuffle baseline.
class RandomPolicy : public Policy {
public:
    explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
    void order_actions(const StateView&, NodeId, std::vector<NodeId>& actions) override {
        rng_.shuffle(actions);
    }

private:
    Rng rng_;
};

/// Descending target degree, ties toward smaller id.
class DegreePolicy : public Policy {
public:
    void order_actions(const StateView& view, NodeId, std::vector<NodeId>& actions) override;
};

/// Pass-through (actions stay in ascending id order).
class IdentityPolicy : public Policy {
public:
    void order_actions(const StateView&, NodeId, std::vector<NodeId>&) override {}
};

/// Puts a reference mapping's target first; used to replay known solutions.
class HintPolicy : public Policy {
public:
    explicit HintPolicy(std::vector<NodeId> mapping) : mapping_(std::move(mapping)) {}
    void order_actions(const StateView&, NodeId u_t, std::vector<NodeId>& actions) override;

private:
    std::vector<NodeId> mapping_;
};

/// Orders actions by descending model probability (ties toward smaller id).
/// Owns a per-search embedding cache; the shared model is never written.
class NeuralPolicy : public Policy {
public:
    explicit NeuralPolicy(PolicyModel& model) : model_(model) {}
    void order_actions(const StateView& view, NodeId u_t, std::vector<NodeId>& actions) override;

    EmbeddingCache& cache() { return cache_; }

private:
    PolicyModel& model_;
    EmbeddingCache cache_;
    Tape tape_;
};

}  // namespace sgm
