#pragma once

#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "sgm/filter.hpp"
#include "sgm/graph.hpp"
#include "sgm/ordering.hpp"

namespace sgm {

inline constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

/// All limits a single search run honors. Zero disables a limit for the
/// wall-clock, step, and restart fields; the solution cap uses kUnlimited.
struct SearchBudget {
    double wall_seconds = 0;                  // 0 = unlimited
    std::size_t max_steps = 0;                // recursive-call count; 0 = unlimited
    std::size_t solution_cap = kUnlimited;    // stop after this many matches
    std::size_t restart_threshold = 10;       // min dead ends between restarts
    std::size_t restart_budget = 120;         // max restarts per search; 0 = unlimited
    bool enable_restarts = true;
    bool promise_minimize = false;            // resume at min-score ancestor instead
};

/// Read-only view of the running search handed to policies.
struct StateView {
    const LabeledGraph& query;
    const LabeledGraph& target;
    const CandidateSets& candidates;
    const QueryOrder& order;
    std::span<const NodeId> mapped;          // per query node; kNoNode if unmatched
    std::span<const std::uint8_t> used;      // per target node
    std::size_t depth;                       // |M|
};

/// Orders the local candidate list for the current query node in place.
/// Implementations must impose a total order; the search never drops actions.
class Policy {
public:
    virtual ~Policy() = default;
    virtual void order_actions(const StateView& view, NodeId u_t, std::vector<NodeId>& actions) = 0;
};

/// One node of the retained search tree. `v` is the target chosen to reach
/// this node; the root has v == kNoNode. `actions` is the policy-ordered local
/// candidate list for query node order[depth].
struct SearchTreeNode {
    std::int64_t parent = -1;
    NodeId v = kNoNode;
    std::uint32_t depth = 0;
    std::vector<NodeId> actions;
    std::uint32_t explored = 0;
    bool solution = false;
};

struct SearchTree {
    std::vector<SearchTreeNode> nodes;
    std::vector<std::size_t> solution_leaves;
};

struct SearchOutcome {
    std::vector<std::vector<NodeId>> matches;  // each indexed by query node id
    std::size_t steps = 0;
    double first_solution_ms = -1;             // wall clock; < 0 when unsolved
    std::size_t first_solution_steps = 0;
    std::size_t max_depth = 0;                 // largest matched prefix reached
    std::size_t dead_ends = 0;
    std::size_t restarts = 0;
    bool budget_exhausted = false;
    std::unique_ptr<SearchTree> tree;          // present when collect_tree was set

    bool solved() const { return !matches.empty(); }
};

/// Promise score of a live ancestor: (2 * depth/|V_q| + (1 - explored_fraction)) / 3.
double promise_restart_score(std::size_t depth, std::size_t query_size, std::size_t explored,
                             std::size_t total_actions);

/// State-dependent action space for query node u_t: v is kept iff it is in
/// C(u_t), not yet used, and adjacent in the target to the image of every
/// already-matched neighbor of u_t. Iterates over the smallest relevant
/// adjacency or candidate set; the result is ascending.
std::vector<NodeId> local_candidates(const LabeledGraph& q, const LabeledGraph& G,
                                     const CandidateSets& C, std::span<const NodeId> mapped,
                                     std::span<const std::uint8_t> used, NodeId u_t);

/// Depth-first backtracking over policy-ordered local candidates. Emits every
/// non-induced match reachable within the budget; with an unlimited budget the
/// match multiset equals the brute-force enumeration regardless of policy.
/// On a dead end the search may resume at the most promising live ancestor
/// instead of the parent (promise restarts); suspended branches are kept and
/// finished later, so restarts reorder exploration without losing any of it.
SearchOutcome backtracking_search(const LabeledGraph& q, const LabeledGraph& G,
                                  const CandidateSets& C, const QueryOrder& order, Policy& policy,
                                  const SearchBudget& budget, bool collect_tree = false);

/// `M <q:t> ...` lines for every match, then `S <steps> <first_ms> <num_matches>`.
std::string format_search_output(const SearchOutcome& outcome, bool virtual_time);

}  // namespace sgm
