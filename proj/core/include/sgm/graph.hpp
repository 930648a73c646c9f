#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sgm {

using NodeId = std::uint32_t;
using Label = std::int32_t;

inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

/// Thrown by parse_graph / parse_mapping with the 1-based line that failed.
struct ParseError : std::runtime_error {
    ParseError(std::size_t line_, const std::string& what_)
        : std::runtime_error("line " + std::to_string(line_) + ": " + what_), line(line_) {}
    std::size_t line;
};

/// Immutable undirected labeled graph in CSR form. Node ids are 0-based and
/// consecutive; adjacency lists are sorted; no self-loops or duplicate edges.
class LabeledGraph {
public:
    LabeledGraph() = default;

    /// Builds from an edge list. Edges may come in either endpoint order.
    /// Throws std::invalid_argument on self-loops, duplicate edges, or ids
    /// out of range.
    static LabeledGraph from_edges(std::size_t num_nodes, std::vector<Label> labels,
                                   const std::vector<std::pair<NodeId, NodeId>>& edges);

    std::size_t num_nodes() const { return labels_.size(); }
    std::size_t num_edges() const { return num_edges_; }

    Label label(NodeId u) const { return labels_[u]; }
    const std::vector<Label>& labels() const { return labels_; }

    std::span<const NodeId> neighbors(NodeId u) const {
        return {adj_.data() + offsets_[u], adj_.data() + offsets_[u + 1]};
    }
    std::size_t degree(NodeId u) const { return offsets_[u + 1] - offsets_[u]; }

    bool has_edge(NodeId u, NodeId v) const;

    bool connected() const;

    friend bool operator==(const LabeledGraph&, const LabeledGraph&) = default;

private:
    std::size_t num_edges_ = 0;
    std::vector<Label> labels_;
    std::vector<std::size_t> offsets_ = {0};
    std::vector<NodeId> adj_;
};

/// Parses the t/v/e text format:
///   t <num_nodes> <num_edges>
///   v <id> <label> <degree>     (ids 0..n-1 in order)
///   e <src> <dst>
/// Degree fields must match the adjacency implied by the e-lines.
LabeledGraph parse_graph(std::istream& in);
LabeledGraph parse_graph(const std::string& text);
LabeledGraph load_graph(const std::filesystem::path& path);

/// Canonical text form: e-lines emitted once with src < dst, sorted.
/// parse_graph(serialize_graph(g)) == g.
std::string serialize_graph(const LabeledGraph& g);
void save_graph(const std::filesystem::path& path, const LabeledGraph& g);

/// Sidecar mapping file: one `m <query_id> <target_id>` line per query node.
std::vector<NodeId> parse_mapping(std::istream& in);
std::string serialize_mapping(std::span<const NodeId> mapping);
std::vector<NodeId> load_mapping(const std::filesystem::path& path);
void save_mapping(const std::filesystem::path& path, std::span<const NodeId> mapping);

}  // namespace sgm
