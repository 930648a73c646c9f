#include "sgm/ldp.hpp"

#include <algorithm>
#include <cmath>

namespace sgm {

std::array<double, kLdpDim> ldp_features(const LabeledGraph& g, NodeId u) {
    auto nbrs = g.neighbors(u);
    if (nbrs.empty()) return {0, 0, 0, 0, 0};
    double mn = static_cast<double>(g.num_nodes()), mx = 0, sum = 0, sumsq = 0;
    for (NodeId v : nbrs) {
        double d = static_cast<double>(g.degree(v));
        mn = std::min(mn, d);
        mx = std::max(mx, d);
        sum += d;
        sumsq += d * d;
    }
    double n = static_cast<double>(nbrs.size());
    double mean = sum / n;
    double var = std::max(0.0, sumsq / n - mean * mean);
    return {static_cast<double>(nbrs.size()), mn, mx, mean, std::sqrt(var)};
}

std::vector<double> initial_encoding(const LabeledGraph& g, std::span<const NodeId> selected) {
    std::vector<std::uint8_t> flag(g.num_nodes(), 0);
    for (NodeId u : selected) flag[u] = 1;
    std::vector<double> enc(g.num_nodes() * kInitialEncodingDim, 0.0);
    for (std::size_t u = 0; u < g.num_nodes(); ++u) {
        auto f = ldp_features(g, static_cast<NodeId>(u));
        double* row = enc.data() + u * kInitialEncodingDim;
        std::copy(f.begin(), f.end(), row);
        row[kLdpDim + 0] = flag[u] ? 0.0 : 1.0;
        row[kLdpDim + 1] = flag[u] ? 1.0 : 0.0;
    }
    return enc;
}

}  // namespace sgm
