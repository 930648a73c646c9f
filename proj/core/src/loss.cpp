#include "sgm/loss.hpp"

#include <algorithm>
#include <map>

#include "sgm/context.hpp"

namespace sgm {

namespace {

struct PairSet {
    // evaluable pairs, grouped by query node for batched logit evaluation
    std::vector<PairTag> pos, neg;
    std::size_t skipped = 0;
};

StateContext context_of(const TrainingSample& s) {
    std::vector<std::uint8_t> used(s.problem->target->num_nodes(), 0);
    for (NodeId v : s.mapped)
        if (v != kNoNode) used[v] = 1;
    return build_state_context(s.problem->query, *s.problem->target, s.problem->candidates,
                               s.mapped, used);
}

bool evaluable(const StateContext& ctx, NodeId u, NodeId v) {
    if (ctx.is_matched(u)) return ctx.matched[u] == v;
    const auto& f = ctx.future[u];
    return std::binary_search(f.begin(), f.end(), v);
}

PairSet filter_pairs(const StateContext& ctx, const TrainingSample& s) {
    PairSet out;
    for (const auto& p : s.positives)
        (evaluable(ctx, p.u, p.v) ? out.pos.push_back(p) : void(++out.skipped));
    for (const auto& p : s.negatives)
        (evaluable(ctx, p.u, p.v) ? out.neg.push_back(p) : void(++out.skipped));
    return out;
}

std::vector<NodeId> pair_targets(const PairSet& ps) {
    std::vector<NodeId> t;
    for (const auto& p : ps.pos) t.push_back(p.v);
    for (const auto& p : ps.neg) t.push_back(p.v);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

ValueId fold_add(Tape& tape, const std::vector<ValueId>& terms) {
    if (terms.empty()) return tape.constant(Tensor::scalar(0.0));
    ValueId acc = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) acc = tape.add(acc, terms[i]);
    return acc;
}

// Per-pair policy logits at the sample's state, batched by query node.
// Returns one [1,1] value per pair, aligned with `pairs`.
std::vector<ValueId> pair_logits(Tape& tape, PolicyModel& model,
                                 const PolicyModel::EncodeResult& enc, ValueId h_state,
                                 const std::vector<PairTag>& pairs) {
    std::map<NodeId, std::vector<std::size_t>> by_u;
    for (std::size_t i = 0; i < pairs.size(); ++i) by_u[pairs[i].u].push_back(i);
    std::vector<ValueId> out(pairs.size());
    for (auto& [u, idxs] : by_u) {
        std::vector<NodeId> vs(idxs.size());
        for (std::size_t i = 0; i < idxs.size(); ++i) vs[i] = pairs[idxs[i]].v;
        ValueId logits = model.policy_logits(tape, enc, h_state, u, vs);  // [n,1]
        for (std::size_t i = 0; i < idxs.size(); ++i)
            out[idxs[i]] = tape.gather_rows(logits, {static_cast<std::uint32_t>(i)});
    }
    return out;
}

ValueId la_from_logits(Tape& tape, const std::vector<ValueId>& pos_logits,
                       const std::vector<ValueId>& neg_logits) {
    std::vector<ValueId> terms;
    for (ValueId l : pos_logits) {
        ValueId pi = tape.clamp(tape.sigmoid(l), kProbClamp, 1.0 - kProbClamp);
        terms.push_back(tape.scale(tape.sum_all(tape.log(pi)), -1.0));
    }
    for (ValueId l : neg_logits) {
        ValueId pi = tape.clamp(tape.sigmoid(l), kProbClamp, 1.0 - kProbClamp);
        ValueId one_minus = tape.sub(tape.constant(Tensor({1, 1}, {1.0})), pi);
        terms.push_back(tape.scale(tape.sum_all(tape.log(one_minus)), -1.0));
    }
    return fold_add(tape, terms);
}

ValueId mm_from_embeddings(Tape& tape, PolicyModel& model, const PolicyModel::EncodeResult& enc,
                           const PairSet& ps, double margin) {
    (void)model;
    auto embed_err = [&](const PairTag& p) {
        ValueId hu = tape.gather_rows(enc.query_nodes, {static_cast<std::uint32_t>(p.u)});
        ValueId hv = tape.gather_rows(
            enc.target_nodes, {static_cast<std::uint32_t>(enc.target_row_of[p.v])});
        ValueId r = tape.relu(tape.sub(hu, hv));
        return tape.sum_all(tape.mul(r, r));  // [1,1]
    };
    std::vector<ValueId> terms;
    for (const auto& p : ps.pos) terms.push_back(embed_err(p));
    for (const auto& p : ps.neg) {
        ValueId e = embed_err(p);
        terms.push_back(tape.relu(tape.sub(tape.constant(Tensor::scalar(margin)), e)));
    }
    return fold_add(tape, terms);
}

struct Shared {
    StateContext ctx;
    PairSet pairs;
    PolicyModel::EncodeResult enc;
    ValueId h_state;
};

Shared shared_forward(Tape& tape, PolicyModel& model, const TrainingSample& sample,
                      const PolicyModel::IntraOnTape* intra) {
    Shared s{context_of(sample), {}, {}, 0};
    s.pairs = filter_pairs(s.ctx, sample);
    auto targets = pair_targets(s.pairs);
    const LabeledGraph& q = sample.problem->query;
    const LabeledGraph& G = *sample.problem->target;
    s.enc = intra ? model.encode_with_intra(tape, q, G, s.ctx, targets, *intra)
                  : model.encode(tape, q, G, s.ctx, targets, nullptr);
    s.h_state = model.state_embedding(tape, s.enc.query_nodes);
    return s;
}

}  // namespace

ValueId look_ahead_loss(Tape& tape, PolicyModel& model, const TrainingSample& sample,
                        std::size_t* skipped) {
    Shared s = shared_forward(tape, model, sample, nullptr);
    if (skipped) *skipped = s.pairs.skipped;
    auto pos = pair_logits(tape, model, s.enc, s.h_state, s.pairs.pos);
    auto neg = pair_logits(tape, model, s.enc, s.h_state, s.pairs.neg);
    return la_from_logits(tape, pos, neg);
}

ValueId max_margin_loss(Tape& tape, PolicyModel& model, const TrainingSample& sample,
                        double margin, std::size_t* skipped) {
    Shared s = shared_forward(tape, model, sample, nullptr);
    if (skipped) *skipped = s.pairs.skipped;
    return mm_from_embeddings(tape, model, s.enc, s.pairs, margin);
}

LossTerms total_loss_with_intra(Tape& tape, PolicyModel& model, const TrainingSample& sample,
                                const PolicyModel::IntraOnTape& intra, double margin) {
    Shared s = shared_forward(tape, model, sample, &intra);
    LossTerms t;
    t.pairs = s.pairs.pos.size() + s.pairs.neg.size();
    t.skipped_pairs = s.pairs.skipped;
    auto pos = pair_logits(tape, model, s.enc, s.h_state, s.pairs.pos);
    auto neg = pair_logits(tape, model, s.enc, s.h_state, s.pairs.neg);
    t.la = la_from_logits(tape, pos, neg);
    t.mm = mm_from_embeddings(tape, model, s.enc, s.pairs, margin);
    t.total = tape.add(t.la, t.mm);
    return t;
}

LossTerms total_loss(Tape& tape, PolicyModel& model, const TrainingSample& sample, double margin) {
    auto intra = model.intra_forward(tape, sample.problem->query, *sample.problem->target);
    return total_loss_with_intra(tape, model, sample, intra, margin);
}

}  // namespace sgm
