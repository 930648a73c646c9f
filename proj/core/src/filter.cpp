#include "sgm/filter.hpp"

#include <algorithm>

namespace sgm {

namespace {

// Sorted (label, count) pairs over a node's neighborhood.
std::vector<std::pair<Label, std::size_t>> neighbor_label_counts(const LabeledGraph& g, NodeId u) {
    std::vector<Label> ls;
    ls.reserve(g.degree(u));
    for (NodeId v : g.neighbors(u)) ls.push_back(g.label(v));
    std::sort(ls.begin(), ls.end());
    std::vector<std::pair<Label, std::size_t>> out;
    for (std::size_t i = 0; i < ls.size();) {
        std::size_t j = i;
        while (j < ls.size() && ls[j] == ls[i]) ++j;
        out.emplace_back(ls[i], j - i);
        i = j;
    }
    return out;
}

bool dominates(const std::vector<std::pair<Label, std::size_t>>& have,
               const std::vector<std::pair<Label, std::size_t>>& need) {
    std::size_t i = 0;
    for (auto [l, c] : need) {
        while (i < have.size() && have[i].first < l) ++i;
        if (i == have.size() || have[i].first != l || have[i].second < c) return false;
    }
    return true;
}

}  // namespace

CandidateSets ldf_filter(const LabeledGraph& q, const LabeledGraph& G) {
    CandidateSets C;
    C.sets.resize(q.num_nodes());
    for (std::size_t u = 0; u < q.num_nodes(); ++u) {
        auto uu = static_cast<NodeId>(u);
        for (std::size_t v = 0; v < G.num_nodes(); ++v) {
            auto vv = static_cast<NodeId>(v);
            if (G.label(vv) == q.label(uu) && G.degree(vv) >= q.degree(uu))
                C.sets[u].push_back(vv);
        }
    }
    return C;
}

CandidateSets nlf_filter(const LabeledGraph& q, const LabeledGraph& G, const CandidateSets& base) {
    CandidateSets C;
    C.sets.resize(q.num_nodes());
    for (std::size_t u = 0; u < q.num_nodes(); ++u) {
        auto need = neighbor_label_counts(q, static_cast<NodeId>(u));
        for (NodeId v : base.sets[u])
            if (dominates(neighbor_label_counts(G, v), need)) C.sets[u].push_back(v);
    }
    return C;
}

}  // namespace sgm
