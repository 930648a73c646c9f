#include "sgm/policies.hpp"

#include <algorithm>

#include "sgm/context.hpp"

namespace sgm {

void DegreePolicy::order_actions(const StateView& view, NodeId, std::vector<NodeId>& actions) {
    std::stable_sort(actions.begin(), actions.end(), [&](NodeId a, NodeId b) {
        if (view.target.degree(a) != view.target.degree(b))
            return view.target.degree(a) > view.target.degree(b);
        return a < b;
    });
}

void HintPolicy::order_actions(const StateView&, NodeId u_t, std::vector<NodeId>& actions) {
    if (u_t >= mapping_.size()) return;
    auto it = std::find(actions.begin(), actions.end(), mapping_[u_t]);
    if (it != actions.end()) std::rotate(actions.begin(), it, it + 1);
}

void NeuralPolicy::order_actions(const StateView& view, NodeId u_t, std::vector<NodeId>& actions) {
    tape_.reset();
    StateContext ctx =
        build_state_context(view.query, view.target, view.candidates, view.mapped, view.used);
    auto enc = model_.encode(tape_, view.query, view.target, ctx, actions, &cache_);
    ValueId hs = model_.state_embedding(tape_, enc.query_nodes);
    ValueId logits = model_.policy_logits(tape_, enc, hs, u_t, actions);
    const Tensor& l = tape_.value(logits);

    std::vector<std::size_t> idx(actions.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (l.at(a, 0) != l.at(b, 0)) return l.at(a, 0) > l.at(b, 0);
        return actions[a] < actions[b];
    });
    std::vector<NodeId> ordered(actions.size());
    for (std::size_t i = 0; i < idx.size(); ++i) ordered[i] = actions[idx[i]];
    actions = std::move(ordered);
    tape_.reset();
}

}  // namespace sgm
