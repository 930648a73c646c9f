#include "sgm/model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "sgm/ldp.hpp"

namespace sgm {

void EncoderConfig::validate() const {
    if (layers < 1) throw std::invalid_argument("encoder needs at least one layer");
    if (attention_mlp.size() < 2 || attention_mlp.front() != dim || attention_mlp.back() != 1)
        throw std::invalid_argument("attention MLP dims must run from dim to 1");
    if (policy_mlp.size() < 2 || policy_mlp.front() != bilinear_slices + dim ||
        policy_mlp.back() != 1)
        throw std::invalid_argument("policy MLP dims must run from slices+dim to 1");
}

namespace {

std::string layer_name(std::size_t k, const char* part) {
    return "enc.l" + std::to_string(k) + "." + part;
}

void create_linear(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out,
                   std::uint64_t seed) {
    store.create(prefix + ".W", {in, out}, Init::xavier, seed);
    store.create(prefix + ".b", {1, out}, Init::zeros, seed);
}

}  // namespace

PolicyModel::PolicyModel(EncoderConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
    cfg_.validate();
    const std::size_t D = cfg_.dim, P = cfg_.proj_dim;
    for (std::size_t k = 0; k < cfg_.layers; ++k) {
        std::size_t in = k == 0 ? kInitialEncodingDim : D;
        create_linear(params_, layer_name(k, "sage"), 2 * in, D, seed);
        create_linear(params_, layer_name(k, "att_q"), D, P, seed);
        create_linear(params_, layer_name(k, "att_g"), D, P, seed);
        create_linear(params_, layer_name(k, "val_q"), D, P, seed);
        create_linear(params_, layer_name(k, "val_g"), D, P, seed);
        create_linear(params_, layer_name(k, "comb_q"), P + D, D, seed);
        std::size_t g_msg = P + (cfg_.query_readout_concat ? D : 0);
        create_linear(params_, layer_name(k, "comb_g"), g_msg + D, D, seed);
    }
    params_.create("enc.ln.gamma", {1, D}, Init::ones, seed);
    params_.create("enc.ln.beta", {1, D}, Init::zeros, seed);
    for (std::size_t i = 0; i + 1 < cfg_.attention_mlp.size(); ++i)
        create_linear(params_, "dec.att." + std::to_string(i), cfg_.attention_mlp[i],
                      cfg_.attention_mlp[i + 1], seed);
    params_.create("dec.bilinear.W", {cfg_.bilinear_slices, D, D}, Init::xavier, seed);
    for (std::size_t i = 0; i + 1 < cfg_.policy_mlp.size(); ++i)
        create_linear(params_, "dec.policy." + std::to_string(i), cfg_.policy_mlp[i],
                      cfg_.policy_mlp[i + 1], seed);
}

ValueId PolicyModel::initial_encoding_const(Tape& tape, const LabeledGraph& g) const {
    std::vector<double> enc = initial_encoding(g, {});
    if (!cfg_.use_ldp) {
        for (std::size_t u = 0; u < g.num_nodes(); ++u)
            for (std::size_t j = 0; j < kLdpDim; ++j) enc[u * kInitialEncodingDim + j] = 0.0;
    }
    return tape.constant(Tensor({g.num_nodes(), kInitialEncodingDim}, std::move(enc)));
}

ValueId PolicyModel::intra_propagate(Tape& tape, const LabeledGraph& g, ValueId h,
                                     std::size_t layer) {
    // Mean over neighbor rows; isolated nodes keep a zero message.
    std::vector<std::uint32_t> src, dst;
    src.reserve(2 * g.num_edges());
    dst.reserve(2 * g.num_edges());
    std::vector<double> inv_deg(g.num_nodes(), 0.0);
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        for (NodeId v : g.neighbors(u)) {
            src.push_back(v);
            dst.push_back(u);
        }
        if (g.degree(u) > 0) inv_deg[u] = 1.0 / static_cast<double>(g.degree(u));
    }
    ValueId nbr_sum = tape.scatter_add_rows(tape.gather_rows(h, std::move(src)), std::move(dst),
                                            g.num_nodes(), /*canonical=*/true);
    ValueId nbr_mean = tape.scale_rows(nbr_sum, std::move(inv_deg));
    ValueId x = tape.concat_cols(h, nbr_mean);
    const std::string pre = layer_name(layer, "sage");
    ValueId lin = tape.add_rowvec(tape.matmul(x, tape.param(params_, pre + ".W")),
                                  tape.param(params_, pre + ".b"));
    return tape.elu(lin);
}

PolicyModel::IntraOnTape PolicyModel::intra_forward(Tape& tape, const LabeledGraph& q,
                                                    const LabeledGraph& G) {
    IntraOnTape out;
    ValueId hq = initial_encoding_const(tape, q);
    ValueId hg = initial_encoding_const(tape, G);
    for (std::size_t k = 0; k < cfg_.layers; ++k) {
        hq = intra_propagate(tape, q, hq, k);
        hg = intra_propagate(tape, G, hg, k);
        out.query_layers.push_back(hq);
        out.target_layers.push_back(hg);
    }
    return out;
}

PolicyModel::InterResult PolicyModel::inter_match_layer(
    Tape& tape, const LabeledGraph& q, const LabeledGraph& G, ValueId hq_intra,
    ValueId hg_intra_full, const StateContext& ctx, std::span<const NodeId> target_rows,
    std::span<const std::int64_t> target_row_of, std::size_t layer) {
    auto& store = params_;
    const std::size_t nq = q.num_nodes();
    const std::size_t nt = target_rows.size();

    // Target nodes touched by either message direction.
    std::vector<NodeId> touched;
    for (NodeId u = 0; u < nq; ++u)
        for (NodeId v : ctx.union_of(u)) touched.push_back(v);
    touched.insert(touched.end(), target_rows.begin(), target_rows.end());
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    std::vector<std::int64_t> touched_row(G.num_nodes(), -1);
    for (std::size_t i = 0; i < touched.size(); ++i) touched_row[touched[i]] = static_cast<std::int64_t>(i);

    auto linear = [&](ValueId x, const char* part) {
        const std::string pre = layer_name(layer, part);
        return tape.elu(tape.add_rowvec(tape.matmul(x, tape.param(store, pre + ".W")),
                                        tape.param(store, pre + ".b")));
    };

    ValueId hg_touched = tape.gather_rows(hg_intra_full, {touched.begin(), touched.end()});
    ValueId q_proj = linear(hq_intra, "att_q");       // [nq, P]
    ValueId g_proj = linear(hg_touched, "att_g");     // [|touched|, P]
    ValueId val_q = linear(hg_touched, "val_q");      // values G contributes to q
    ValueId val_g = linear(hq_intra, "val_g");        // values q contributes to G

    ValueId readout = tape.reduce_rows(hq_intra, Reduce::mean);  // [1, D]

    // Messages into query nodes over (u, v') pairs of the union map.
    std::vector<std::uint32_t> pq_u, pq_vrow;
    for (NodeId u = 0; u < nq; ++u)
        for (NodeId v : ctx.union_of(u)) {
            pq_u.push_back(u);
            pq_vrow.push_back(static_cast<std::uint32_t>(touched_row[v]));
        }
    ValueId msg_q;
    {
        ValueId qs = tape.gather_rows(q_proj, pq_u);
        ValueId gs = tape.gather_rows(g_proj, pq_vrow);
        ValueId logits = tape.row_sums(tape.mul(qs, gs));
        ValueId att = tape.segment_softmax(logits, pq_u);
        ValueId vals = tape.gather_rows(val_q, pq_vrow);
        msg_q = tape.scatter_add_rows(tape.mul_colvec(vals, att), std::move(pq_u), nq);
    }

    // Messages into the requested target rows over (v, u') pairs.
    auto rev = ctx.reverse_for(target_rows);
    std::vector<std::uint32_t> pg_vrow, pg_u;
    for (std::size_t r = 0; r < nt; ++r)
        for (NodeId u : rev[r]) {
            pg_vrow.push_back(static_cast<std::uint32_t>(r));
            pg_u.push_back(u);
        }
    ValueId msg_g;
    {
        std::vector<std::uint32_t> g_rows(pg_vrow.size());
        for (std::size_t i = 0; i < pg_vrow.size(); ++i)
            g_rows[i] = static_cast<std::uint32_t>(touched_row[target_rows[pg_vrow[i]]]);
        ValueId qs = tape.gather_rows(q_proj, pg_u);
        ValueId gs = tape.gather_rows(g_proj, std::move(g_rows));
        ValueId logits = tape.row_sums(tape.mul(qs, gs));
        ValueId att = tape.segment_softmax(logits, pg_vrow);
        ValueId vals = tape.gather_rows(val_g, std::move(pg_u));
        msg_g = tape.scatter_add_rows(tape.mul_colvec(vals, att), std::move(pg_vrow), nt);
    }
    if (cfg_.query_readout_concat) msg_g = tape.concat_cols(msg_g, tape.repeat_row(readout, nt));

    std::vector<std::uint32_t> tgt_idx(target_rows.begin(), target_rows.end());
    ValueId hg_rows = tape.gather_rows(hg_intra_full, std::move(tgt_idx));

    InterResult out;
    {
        const std::string pre = layer_name(layer, "comb_q");
        out.query_out = tape.elu(tape.add_rowvec(
            tape.matmul(tape.concat_cols(msg_q, hq_intra), tape.param(store, pre + ".W")),
            tape.param(store, pre + ".b")));
    }
    {
        const std::string pre = layer_name(layer, "comb_g");
        out.target_out = tape.elu(tape.add_rowvec(
            tape.matmul(tape.concat_cols(msg_g, hg_rows), tape.param(store, pre + ".W")),
            tape.param(store, pre + ".b")));
    }
    (void)target_row_of;
    return out;
}

PolicyModel::EncodeResult PolicyModel::encode_with_intra(Tape& tape, const LabeledGraph& q,
                                                         const LabeledGraph& G,
                                                         const StateContext& ctx,
                                                         std::span<const NodeId> target_subset,
                                                         const IntraOnTape& intra) {
    EncodeResult res;
    if (target_subset.empty()) {
        res.target_rows.resize(G.num_nodes());
        for (NodeId v = 0; v < G.num_nodes(); ++v) res.target_rows[v] = v;
    } else {
        res.target_rows.assign(target_subset.begin(), target_subset.end());
        std::sort(res.target_rows.begin(), res.target_rows.end());
        res.target_rows.erase(std::unique(res.target_rows.begin(), res.target_rows.end()),
                              res.target_rows.end());
    }
    res.target_row_of.assign(G.num_nodes(), -1);
    for (std::size_t i = 0; i < res.target_rows.size(); ++i)
        res.target_row_of[res.target_rows[i]] = static_cast<std::int64_t>(i);

    ValueId jk_q = 0, jk_g = 0;
    for (std::size_t k = 0; k < cfg_.layers; ++k) {
        auto layer_out = inter_match_layer(tape, q, G, intra.query_layers[k], intra.target_layers[k],
                                           ctx, res.target_rows, res.target_row_of, k);
        if (k == 0) {
            jk_q = layer_out.query_out;
            jk_g = layer_out.target_out;
        } else {
            jk_q = tape.emax(jk_q, layer_out.query_out);
            jk_g = tape.emax(jk_g, layer_out.target_out);
        }
    }
    auto& store = params_;
    ValueId gamma = tape.param(store, "enc.ln.gamma");
    ValueId beta = tape.param(store, "enc.ln.beta");
    res.query_nodes = tape.layer_norm(jk_q, gamma, beta);
    res.target_nodes = tape.layer_norm(jk_g, gamma, beta);
    return res;
}

PolicyModel::EncodeResult PolicyModel::encode(Tape& tape, const LabeledGraph& q,
                                              const LabeledGraph& G, const StateContext& ctx,
                                              std::span<const NodeId> target_subset,
                                              EmbeddingCache* cache) {
    IntraOnTape intra;
    if (cache) {
        if (!cache->matches(q, G, cfg_.use_ldp)) {
            Tape warm;
            auto ids = intra_forward(warm, q, G);
            cache->query_layers.clear();
            cache->target_layers.clear();
            for (std::size_t k = 0; k < cfg_.layers; ++k) {
                cache->query_layers.push_back(warm.value(ids.query_layers[k]));
                cache->target_layers.push_back(warm.value(ids.target_layers[k]));
            }
            cache->query_key = &q;
            cache->target_key = &G;
            cache->ldp_variant = cfg_.use_ldp;
            cache->valid = true;
        }
        for (std::size_t k = 0; k < cfg_.layers; ++k) {
            intra.query_layers.push_back(tape.constant(cache->query_layers[k]));
            intra.target_layers.push_back(tape.constant(cache->target_layers[k]));
        }
    } else {
        intra = intra_forward(tape, q, G);
    }
    return encode_with_intra(tape, q, G, ctx, target_subset, intra);
}

ValueId PolicyModel::mlp_chain(Tape& tape, ValueId x, const std::string& prefix,
                               std::size_t n_layers) {
    auto& store = params_;
    for (std::size_t i = 0; i < n_layers; ++i) {
        const std::string pre = prefix + std::to_string(i);
        x = tape.add_rowvec(tape.matmul(x, tape.param(store, pre + ".W")),
                            tape.param(store, pre + ".b"));
        if (i + 1 < n_layers) x = tape.elu(x);  // hidden layers only
    }
    return x;
}

ValueId PolicyModel::state_embedding(Tape& tape, ValueId query_nodes) {
    const std::size_t nq = tape.value(query_nodes).dim(0);
    ValueId scores = mlp_chain(tape, query_nodes, "dec.att.", cfg_.attention_mlp.size() - 1);
    ValueId att = tape.segment_softmax(scores, std::vector<std::uint32_t>(nq, 0));
    return tape.reduce_rows(tape.mul_colvec(query_nodes, att), Reduce::sum);
}

ValueId PolicyModel::policy_logits(Tape& tape, const EncodeResult& enc, ValueId h_state,
                                   NodeId u_t, std::span<const NodeId> actions) {
    if (actions.empty()) throw std::invalid_argument("policy_logits: empty action list");
    auto& store = params_;
    ValueId hu = tape.gather_rows(enc.query_nodes, {static_cast<std::uint32_t>(u_t)});
    std::vector<std::uint32_t> rows(actions.size());
    for (std::size_t i = 0; i < actions.size(); ++i) {
        std::int64_t r = enc.target_row_of[actions[i]];
        if (r < 0) throw std::invalid_argument("policy_logits: action outside encoded subset");
        rows[i] = static_cast<std::uint32_t>(r);
    }
    ValueId hv = tape.gather_rows(enc.target_nodes, std::move(rows));
    ValueId interact = tape.bilinear(hu, tape.param(store, "dec.bilinear.W"), hv);
    ValueId x = tape.concat_cols(interact, tape.repeat_row(h_state, actions.size()));
    return mlp_chain(tape, x, "dec.policy.", cfg_.policy_mlp.size() - 1);  // [n, 1]
}

std::vector<double> PolicyModel::policy_distribution(std::span<const double> logits) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double l : logits) mx = std::max(mx, l);
    std::vector<double> p(logits.size());
    double z = 0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        z += p[i];
    }
    for (double& v : p) v /= z;
    return p;
}

void PolicyModel::save(std::ostream& out) const {
    out << "CFG layers=" << cfg_.layers << " dim=" << cfg_.dim
        << " slices=" << cfg_.bilinear_slices << " proj=" << cfg_.proj_dim
        << " ldp=" << (cfg_.use_ldp ? 1 : 0)
        << " qreadout=" << (cfg_.query_readout_concat ? 1 : 0) << " att=";
    for (std::size_t i = 0; i < cfg_.attention_mlp.size(); ++i)
        out << (i ? "," : "") << cfg_.attention_mlp[i];
    out << " policy=";
    for (std::size_t i = 0; i < cfg_.policy_mlp.size(); ++i)
        out << (i ? "," : "") << cfg_.policy_mlp[i];
    out << '\n';
    params_.save(out);
}

namespace {

std::vector<std::size_t> parse_dims(const std::string& s) {
    std::vector<std::size_t> out;
    std::istringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoul(tok));
    return out;
}

}  // namespace

PolicyModel PolicyModel::load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("CFG ", 0) != 0)
        throw std::runtime_error("model checkpoint: missing CFG header");
    EncoderConfig cfg;
    std::istringstream hs(line.substr(4));
    std::string kv;
    while (hs >> kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::runtime_error("model checkpoint: bad CFG entry " + kv);
        std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        if (key == "layers") cfg.layers = std::stoul(val);
        else if (key == "dim") cfg.dim = std::stoul(val);
        else if (key == "slices") cfg.bilinear_slices = std::stoul(val);
        else if (key == "proj") cfg.proj_dim = std::stoul(val);
        else if (key == "ldp") cfg.use_ldp = val != "0";
        else if (key == "qreadout") cfg.query_readout_concat = val != "0";
        else if (key == "att") cfg.attention_mlp = parse_dims(val);
        else if (key == "policy") cfg.policy_mlp = parse_dims(val);
        else throw std::runtime_error("model checkpoint: unknown CFG key " + key);
    }

    PolicyModel model(cfg, 0);
    ParamStore loaded;
    loaded.load(in);
    if (loaded.size() != model.params_.size())
        throw std::runtime_error("model checkpoint: parameter count mismatch");
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        const auto& exp = model.params_.entry(i);
        if (!loaded.has(exp.name))
            throw std::runtime_error("model checkpoint: missing parameter " + exp.name);
        const auto& got = loaded.at(exp.name);
        if (got.value.shape() != exp.value.shape())
            throw std::runtime_error("model checkpoint: shape mismatch for " + exp.name);
        model.params_.at(exp.name).value = got.value;
    }
    return model;
}

}  // namespace sgm
