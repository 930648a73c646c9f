#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sgm/context.hpp"
#include "sgm/graph.hpp"
#include "sgm/params.hpp"
#include "sgm/tape.hpp"

namespace sgm {

/// Hyperparameters of the query-conditioned matching encoder and policy head.
struct EncoderConfig {
    std::size_t layers = 8;               // stacked encoder layers
    std::size_t dim = 16;                 // node embedding width D
    std::size_t bilinear_slices = 32;     // F
    std::size_t proj_dim = 16;            // attention/value projection width
    std::vector<std::size_t> attention_mlp = {16, 4, 1};
    std::vector<std::size_t> policy_mlp = {48, 32, 16, 8, 1};
    bool use_ldp = true;                  // zero the degree-profile features when false
    bool query_readout_concat = true;     // concat query readout into target messages

    void validate() const;  // attention_mlp[0] == dim, policy_mlp[0] == slices + dim
};

/// Per-(query, target) cache of the state-independent per-layer embeddings.
/// A hit is bitwise identical to recomputation.
struct EmbeddingCache {
    bool valid = false;
    const void* query_key = nullptr;
    const void* target_key = nullptr;
    bool ldp_variant = true;
    std::vector<Tensor> query_layers;
    std::vector<Tensor> target_layers;

    bool matches(const LabeledGraph& q, const LabeledGraph& G, bool ldp) const {
        return valid && query_key == &q && target_key == &G && ldp_variant == ldp;
    }
};

/// The trainable policy network. Each encoder layer runs shared-weight
/// intra-graph propagation on both graphs, then state-dependent cross-graph
/// attention restricted to the candidate structure; per-layer outputs are
/// combined with an element-wise max and layer-normalized. The decoder scores
/// actions with a bilinear product against an attention-pooled state
/// embedding.
class PolicyModel {
public:
    PolicyModel(EncoderConfig cfg, std::uint64_t seed);

    const EncoderConfig& config() const { return cfg_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    /// State-independent per-layer embeddings recorded on the tape (gradients
    /// flow). Result holds one [*, D] value per layer.
    struct IntraOnTape {
        std::vector<ValueId> query_layers;
        std::vector<ValueId> target_layers;
    };
    IntraOnTape intra_forward(Tape& tape, const LabeledGraph& q, const LabeledGraph& G);

    /// One intra-graph propagation layer (GraphSAGE-style: ELU of a linear map
    /// of [own features, mean of neighbor features]).
    ValueId intra_propagate(Tape& tape, const LabeledGraph& g, ValueId h, std::size_t layer);

    struct EncodeResult {
        ValueId query_nodes = 0;                 // [|V_q|, D]
        ValueId target_nodes = 0;                // [rows, D]
        std::vector<NodeId> target_rows;         // ascending target ids behind target_nodes
        std::vector<std::int64_t> target_row_of;  // target id -> row index or -1
    };

    /// Cross-graph matching layer: softmax-attention messages over the
    /// context's pair structure in both directions, query readout injection,
    /// then per-side combine MLPs. Returns combined embeddings for all query
    /// nodes and for target_rows.
    struct InterResult {
        ValueId query_out;
        ValueId target_out;
    };
    InterResult inter_match_layer(Tape& tape, const LabeledGraph& q, const LabeledGraph& G,
                                  ValueId hq_intra, ValueId hg_intra_full, const StateContext& ctx,
                                  std::span<const NodeId> target_rows,
                                  std::span<const std::int64_t> target_row_of,
                                  std::size_t layer);

    /// Full encoder for one search state. target_subset limits which target
    /// embeddings are materialized (empty = all); restricting the subset never
    /// changes the values of the rows that are produced. When `cache` is given
    /// the intra embeddings come from it (filled on first use) and enter the
    /// tape as constants; otherwise they are recorded on the tape.
    EncodeResult encode(Tape& tape, const LabeledGraph& q, const LabeledGraph& G,
                        const StateContext& ctx, std::span<const NodeId> target_subset = {},
                        EmbeddingCache* cache = nullptr);

    /// Encoder body on top of already-recorded intra embeddings.
    EncodeResult encode_with_intra(Tape& tape, const LabeledGraph& q, const LabeledGraph& G,
                                   const StateContext& ctx, std::span<const NodeId> target_subset,
                                   const IntraOnTape& intra);

    /// Attention-pooled query embedding: softmax over per-node MLP scores,
    /// convex combination of node embeddings. [1, D].
    ValueId state_embedding(Tape& tape, ValueId query_nodes);

    /// Policy logits for every action target, batched: MLP of
    /// [h_u W^{[1:F]} h_v, h_state]. Throws on an empty action list.
    ValueId policy_logits(Tape& tape, const EncodeResult& enc, ValueId h_state, NodeId u_t,
                          std::span<const NodeId> actions);

    /// Softmax over logits (off-tape; numerically stabilized).
    static std::vector<double> policy_distribution(std::span<const double> logits);

    /// Checkpoint: a CFG header line followed by the parameter store.
    void save(std::ostream& out) const;
    static PolicyModel load(std::istream& in);

private:
    ValueId initial_encoding_const(Tape& tape, const LabeledGraph& g) const;
    ValueId mlp_chain(Tape& tape, ValueId x, const std::string& prefix, std::size_t n_layers);

    EncoderConfig cfg_;
    ParamStore params_;
};

}  // namespace sgm
