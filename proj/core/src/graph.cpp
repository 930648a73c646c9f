#include "sgm/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

namespace sgm {

namespace {

std::pair<NodeId, NodeId> canonical_edge(NodeId a, NodeId b) {
    return a < b ? std::pair{a, b} : std::pair{b, a};
}

}  // namespace

LabeledGraph LabeledGraph::from_edges(std::size_t num_nodes, std::vector<Label> labels,
                                      const std::vector<std::pair<NodeId, NodeId>>& edges) {
    if (labels.size() != num_nodes)
        throw std::invalid_argument("label count does not match node count");

    std::vector<std::pair<NodeId, NodeId>> canon;
    canon.reserve(edges.size());
    for (auto [a, b] : edges) {
        if (a >= num_nodes || b >= num_nodes)
            throw std::invalid_argument("edge endpoint out of range");
        if (a == b) throw std::invalid_argument("self-loop");
        canon.push_back(canonical_edge(a, b));
    }
    std::sort(canon.begin(), canon.end());
    if (std::adjacent_find(canon.begin(), canon.end()) != canon.end())
        throw std::invalid_argument("duplicate edge");

    LabeledGraph g;
    g.labels_ = std::move(labels);
    g.num_edges_ = canon.size();

    std::vector<std::size_t> deg(num_nodes, 0);
    for (auto [a, b] : canon) {
        ++deg[a];
        ++deg[b];
    }
    g.offsets_.assign(num_nodes + 1, 0);
    for (std::size_t u = 0; u < num_nodes; ++u) g.offsets_[u + 1] = g.offsets_[u] + deg[u];
    g.adj_.resize(2 * canon.size());
    std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (auto [a, b] : canon) {
        g.adj_[cursor[a]++] = b;
        g.adj_[cursor[b]++] = a;
    }
    for (std::size_t u = 0; u < num_nodes; ++u)
        std::sort(g.adj_.begin() + g.offsets_[u], g.adj_.begin() + g.offsets_[u + 1]);
    return g;
}

bool LabeledGraph::has_edge(NodeId u, NodeId v) const {
    auto nbrs = neighbors(u);
    return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

bool LabeledGraph::connected() const {
    if (num_nodes() == 0) return true;
    std::vector<std::uint8_t> seen(num_nodes(), 0);
    std::vector<NodeId> stack = {0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        NodeId u = stack.back();
        stack.pop_back();
        for (NodeId v : neighbors(u)) {
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                stack.push_back(v);
            }
        }
    }
    return count == num_nodes();
}

namespace {

struct LineReader {
    std::istream& in;
    std::size_t line_no = 0;
    std::string line;

    bool next() {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            return true;
        }
        return false;
    }
};

// Splits into whitespace tokens; rejects anything that is not a plain integer.
std::vector<std::string> tokens_of(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

long long parse_int(const std::string& tok, std::size_t line_no, const char* what) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(tok, &pos);
    } catch (const std::exception&) {
        throw ParseError(line_no, std::string("malformed ") + what + " '" + tok + "'");
    }
    if (pos != tok.size())
        throw ParseError(line_no, std::string("malformed ") + what + " '" + tok + "'");
    return v;
}

}  // namespace

LabeledGraph parse_graph(std::istream& in) {
    LineReader rd{in};
    if (!rd.next()) throw ParseError(1, "missing header line");
    auto head = tokens_of(rd.line);
    if (head.size() != 3 || head[0] != "t")
        throw ParseError(rd.line_no, "expected header 't <num_nodes> <num_edges>'");
    long long n = parse_int(head[1], rd.line_no, "node count");
    long long m = parse_int(head[2], rd.line_no, "edge count");
    if (n < 0 || m < 0) throw ParseError(rd.line_no, "negative count in header");

    std::vector<Label> labels(static_cast<std::size_t>(n));
    std::vector<long long> declared_deg(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        if (!rd.next()) throw ParseError(rd.line_no + 1, "header/body mismatch: missing v-line");
        auto t = tokens_of(rd.line);
        if (t.size() != 4 || t[0] != "v")
            throw ParseError(rd.line_no, "expected 'v <id> <label> <degree>'");
        long long id = parse_int(t[1], rd.line_no, "node id");
        if (id != i)
            throw ParseError(rd.line_no, "non-consecutive node id " + std::to_string(id) +
                                             " (expected " + std::to_string(i) + ")");
        labels[i] = static_cast<Label>(parse_int(t[2], rd.line_no, "label"));
        declared_deg[i] = parse_int(t[3], rd.line_no, "degree");
        if (declared_deg[i] < 0) throw ParseError(rd.line_no, "negative degree");
    }

    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(static_cast<std::size_t>(m));
    std::vector<std::size_t> edge_lines;
    for (long long i = 0; i < m; ++i) {
        if (!rd.next()) throw ParseError(rd.line_no + 1, "header/body mismatch: missing e-line");
        auto t = tokens_of(rd.line);
        if (t.size() != 3 || t[0] != "e") throw ParseError(rd.line_no, "expected 'e <src> <dst>'");
        long long a = parse_int(t[1], rd.line_no, "edge endpoint");
        long long b = parse_int(t[2], rd.line_no, "edge endpoint");
        if (a < 0 || a >= n || b < 0 || b >= n)
            throw ParseError(rd.line_no, "edge endpoint out of range");
        if (a == b) throw ParseError(rd.line_no, "self-loop");
        edges.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
        edge_lines.push_back(rd.line_no);
    }
    if (rd.next()) throw ParseError(rd.line_no, "header/body mismatch: trailing content");

    // Duplicate detection reports the line of the second occurrence.
    {
        std::vector<std::size_t> idx(edges.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return canonical_edge(edges[a].first, edges[a].second) <
                   canonical_edge(edges[b].first, edges[b].second);
        });
        for (std::size_t i = 1; i < idx.size(); ++i) {
            auto ea = canonical_edge(edges[idx[i - 1]].first, edges[idx[i - 1]].second);
            auto eb = canonical_edge(edges[idx[i]].first, edges[idx[i]].second);
            if (ea == eb)
                throw ParseError(std::max(edge_lines[idx[i - 1]], edge_lines[idx[i]]),
                                 "duplicate edge");
        }
    }

    LabeledGraph g = LabeledGraph::from_edges(static_cast<std::size_t>(n), std::move(labels), edges);
    for (std::size_t u = 0; u < g.num_nodes(); ++u) {
        if (declared_deg[u] != static_cast<long long>(g.degree(static_cast<NodeId>(u))))
            throw ParseError(2 + u, "degree field " + std::to_string(declared_deg[u]) +
                                        " contradicts adjacency (actual " +
                                        std::to_string(g.degree(static_cast<NodeId>(u))) + ")");
    }
    return g;
}

LabeledGraph parse_graph(const std::string& text) {
    std::istringstream ss(text);
    return parse_graph(ss);
}

LabeledGraph load_graph(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open graph file: " + path.string());
    return parse_graph(f);
}

std::string serialize_graph(const LabeledGraph& g) {
    std::ostringstream out;
    out << "t " << g.num_nodes() << ' ' << g.num_edges() << '\n';
    for (std::size_t u = 0; u < g.num_nodes(); ++u)
        out << "v " << u << ' ' << g.label(static_cast<NodeId>(u)) << ' '
            << g.degree(static_cast<NodeId>(u)) << '\n';
    for (std::size_t u = 0; u < g.num_nodes(); ++u)
        for (NodeId v : g.neighbors(static_cast<NodeId>(u)))
            if (u < v) out << "e " << u << ' ' << v << '\n';
    return out.str();
}

void save_graph(const std::filesystem::path& path, const LabeledGraph& g) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write graph file: " + path.string());
    f << serialize_graph(g);
}

std::vector<NodeId> parse_mapping(std::istream& in) {
    LineReader rd{in};
    std::vector<std::pair<long long, long long>> rows;
    while (rd.next()) {
        auto t = tokens_of(rd.line);
        if (t.size() != 3 || t[0] != "m")
            throw ParseError(rd.line_no, "expected 'm <query_id> <target_id>'");
        rows.emplace_back(parse_int(t[1], rd.line_no, "query id"),
                          parse_int(t[2], rd.line_no, "target id"));
    }
    std::vector<NodeId> mapping(rows.size(), kNoNode);
    for (auto [q, t] : rows) {
        if (q < 0 || static_cast<std::size_t>(q) >= rows.size() || t < 0)
            throw std::runtime_error("mapping ids out of range");
        mapping[static_cast<std::size_t>(q)] = static_cast<NodeId>(t);
    }
    for (NodeId v : mapping)
        if (v == kNoNode) throw std::runtime_error("mapping misses a query node");
    return mapping;
}

std::string serialize_mapping(std::span<const NodeId> mapping) {
    std::ostringstream out;
    for (std::size_t q = 0; q < mapping.size(); ++q) out << "m " << q << ' ' << mapping[q] << '\n';
    return out.str();
}

std::vector<NodeId> load_mapping(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open mapping file: " + path.string());
    return parse_mapping(f);
}

void save_mapping(const std::filesystem::path& path, std::span<const NodeId> mapping) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write mapping file: " + path.string());
    f << serialize_mapping(mapping);
}

}  // namespace sgm
