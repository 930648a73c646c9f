#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "sgm/oracle.hpp"
#include "sgm/policies.hpp"
#include "sgm/problem.hpp"
#include "sgm/search.hpp"
#include "sgm/verify.hpp"
#include "support/corpus.hpp"

using namespace sgm;
using namespace sgm::testsupport;

namespace {

std::set<std::vector<NodeId>> as_set(const std::vector<std::vector<NodeId>>& ms) {
    return {ms.begin(), ms.end()};
}

SearchOutcome run_search(const LabeledGraph& q, const LabeledGraph& G, Policy& policy,
                         SearchBudget budget = {}, bool collect = false) {
    auto C = nlf_filter(q, G, ldf_filter(q, G));
    auto order = order_query_nodes(q, C);
    return backtracking_search(q, G, C, order, policy, budget, collect);
}

}  // namespace

TEST_CASE("verify_match fundamentals") {
    auto tri = parse_graph(std::string("t 3 3\nv 0 0 2\nv 1 0 2\nv 2 0 2\ne 0 1\ne 0 2\ne 1 2\n"));
    std::vector<NodeId> ident = {0, 1, 2};
    CHECK(verify_match(tri, tri, ident));
    std::vector<NodeId> collapse = {0, 0, 2};
    CHECK_FALSE(verify_match(tri, tri, collapse));
    std::vector<NodeId> partial = {0, 1};
    CHECK_FALSE(verify_match(tri, tri, partial));

    auto relabeled = LabeledGraph::from_edges(3, {0, 0, 1}, {{0, 1}, {0, 2}, {1, 2}});
    CHECK_FALSE(verify_match(tri, relabeled, ident));
}

TEST_CASE("ldf filter") {
    SUBCASE("label and degree rule") {
        auto q = parse_graph(std::string("t 1 0\nv 0 7 0\n"));
        auto G = LabeledGraph::from_edges(5, {7, 3, 7, 7, 3},
                                          {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4}});
        auto C = ldf_filter(q, G);
        CHECK(C.sets[0] == std::vector<NodeId>{0, 2, 3});  // label 7, any degree >= 0
    }
    SUBCASE("absent label gives empty set") {
        auto q = parse_graph(std::string("t 1 0\nv 0 42 0\n"));
        auto G = er_graph(8, 2.0, 2, 3);
        auto C = ldf_filter(q, G);
        CHECK(C.sets[0].empty());
        CHECK(C.any_empty());
    }
}

TEST_CASE("nlf filter is a refinement and respects neighbor label counts") {
    // u needs two label-0 neighbors; v1 has only one plus many label-1s.
    auto q = LabeledGraph::from_edges(3, {1, 0, 0}, {{0, 1}, {0, 2}});
    auto G = LabeledGraph::from_edges(
        7, {1, 0, 1, 1, 1, 0, 0},
        {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {2, 5}, {5, 6}, {2, 6}});
    auto base = ldf_filter(q, G);
    auto C = nlf_filter(q, G, base);
    for (NodeId u = 0; u < q.num_nodes(); ++u) {
        CHECK(std::includes(base.sets[u].begin(), base.sets[u].end(), C.sets[u].begin(),
                            C.sets[u].end()));
    }
    // query node 0 (label 1) needs neighbor-label multiset {0:2}; target node 0
    // has {0:1, 1:3} and must be pruned by NLF while surviving LDF.
    CHECK(std::binary_search(base.sets[0].begin(), base.sets[0].end(), 0u));
    CHECK_FALSE(std::binary_search(C.sets[0].begin(), C.sets[0].end(), 0u));
}

TEST_CASE("filters never prune a true match (oracle referee)") {
    std::size_t checked = 0;
    for (std::size_t i = 0; i < 60; ++i) {
        auto pair = corpus_pair(i);
        auto matches = brute_force_oracle(pair.query, pair.target);
        if (matches.empty()) continue;
        auto ldf = ldf_filter(pair.query, pair.target);
        auto nlf = nlf_filter(pair.query, pair.target, ldf);
        for (const auto& m : matches) {
            for (NodeId u = 0; u < pair.query.num_nodes(); ++u) {
                CHECK(std::binary_search(ldf.sets[u].begin(), ldf.sets[u].end(), m[u]));
                CHECK(std::binary_search(nlf.sets[u].begin(), nlf.sets[u].end(), m[u]));
                ++checked;
            }
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("order_query_nodes follows the least-candidates greedy rule") {
    SUBCASE("path with forced candidate counts") {
        // path a-b-c; fabricate candidate sets of sizes a:5 b:1 c:3
        auto q = LabeledGraph::from_edges(3, {0, 1, 2}, {{0, 1}, {1, 2}});
        CandidateSets C;
        C.sets = {{10, 11, 12, 13, 14}, {20}, {30, 31, 32}};
        auto order = order_query_nodes(q, C);
        CHECK(order.order == std::vector<NodeId>{1, 2, 0});
    }
    SUBCASE("uniform sizes on a star pick the center by degree tie-break") {
        auto q = LabeledGraph::from_edges(4, {0, 0, 0, 0}, {{0, 1}, {0, 2}, {0, 3}});
        CandidateSets C;
        C.sets = {{1, 2}, {3, 4}, {5, 6}, {7, 8}};
        auto order = order_query_nodes(q, C);
        CHECK(order.order.front() == 0);
    }
    SUBCASE("single node") {
        auto q = parse_graph(std::string("t 1 0\nv 0 0 0\n"));
        CandidateSets C;
        C.sets = {{0}};
        auto order = order_query_nodes(q, C);
        CHECK(order.order == std::vector<NodeId>{0});
    }
    SUBCASE("connectivity invariant on random queries") {
        for (std::size_t i = 0; i < 40; ++i) {
            auto pair = corpus_pair(i);
            auto C = ldf_filter(pair.query, pair.target);
            auto order = order_query_nodes(pair.query, C);
            for (std::size_t t = 1; t < order.order.size(); ++t) {
                bool has_back_neighbor = false;
                for (NodeId w : pair.query.neighbors(order.order[t]))
                    if (order.position[w] < t) has_back_neighbor = true;
                CHECK(has_back_neighbor);
            }
        }
    }
    SUBCASE("disconnected query is rejected") {
        auto q = LabeledGraph::from_edges(3, {0, 0, 0}, {{0, 1}});
        CandidateSets C;
        C.sets = {{0}, {1}, {2}};
        CHECK_THROWS_AS(order_query_nodes(q, C), std::invalid_argument);
    }
}

TEST_CASE("local_candidates matches its brute-force definition") {
    for (std::size_t i = 0; i < 40; ++i) {
        auto pair = corpus_pair(i);
        const auto& q = pair.query;
        const auto& G = pair.target;
        auto C = nlf_filter(q, G, ldf_filter(q, G));
        auto order = order_query_nodes(q, C);

        // simulate a random partial state along the order
        Rng rng(Rng::mix(4242, i));
        std::vector<NodeId> mapped(q.num_nodes(), kNoNode);
        std::vector<std::uint8_t> used(G.num_nodes(), 0);
        std::size_t depth = rng.below(q.num_nodes());
        bool dead = false;
        for (std::size_t t = 0; t < depth && !dead; ++t) {
            NodeId u = order.order[t];
            auto A = local_candidates(q, G, C, mapped, used, u);
            if (A.empty()) {
                dead = true;
                break;
            }
            NodeId v = A[rng.below(A.size())];
            mapped[u] = v;
            used[v] = 1;
        }
        if (dead) continue;
        NodeId u_t = order.order[depth];
        auto A = local_candidates(q, G, C, mapped, used, u_t);

        std::vector<NodeId> ref;
        for (NodeId v = 0; v < G.num_nodes(); ++v) {
            if (used[v]) continue;
            if (!std::binary_search(C.sets[u_t].begin(), C.sets[u_t].end(), v)) continue;
            bool ok = true;
            for (NodeId u2 : q.neighbors(u_t))
                if (mapped[u2] != kNoNode && !G.has_edge(v, mapped[u2])) ok = false;
            if (ok) ref.push_back(v);
        }
        CHECK(A == ref);

        // empty mapping returns the candidate set itself
        std::vector<NodeId> none(q.num_nodes(), kNoNode);
        std::vector<std::uint8_t> free(G.num_nodes(), 0);
        CHECK(local_candidates(q, G, C, none, free, u_t) == C.sets[u_t]);
    }
}

TEST_CASE("backtracking search: forced small cases") {
    auto tri = parse_graph(std::string("t 3 3\nv 0 0 2\nv 1 0 2\nv 2 0 2\ne 0 1\ne 0 2\ne 1 2\n"));
    auto path = parse_graph(std::string("t 3 2\nv 0 0 1\nv 1 0 2\nv 2 0 1\ne 0 1\ne 1 2\n"));
    IdentityPolicy policy;
    SUBCASE("triangle into itself: all 6 injections") {
        auto out = run_search(tri, tri, policy);
        CHECK(out.matches.size() == 6);
        for (const auto& m : out.matches) CHECK(verify_match(tri, tri, m));
    }
    SUBCASE("3-path into triangle: 6 non-induced matches") {
        auto out = run_search(path, tri, policy);
        CHECK(out.matches.size() == 6);
    }
    SUBCASE("empty candidate set yields zero matches in zero steps") {
        auto q = parse_graph(std::string("t 1 0\nv 0 42 0\n"));
        auto out = run_search(q, tri, policy);
        CHECK(out.matches.empty());
        CHECK(out.steps == 0);
    }
}

TEST_CASE("oracle equivalence on the random corpus, all policies") {
    PolicyModel model(EncoderConfig{.layers = 2, .dim = 8, .bilinear_slices = 8, .proj_dim = 8,
                                    .attention_mlp = {8, 4, 1}, .policy_mlp = {16, 8, 1}},
                      99);
    for (std::size_t i = 0; i < 60; ++i) {
        auto pair = corpus_pair(i);
        auto expected = as_set(brute_force_oracle(pair.query, pair.target));

        RandomPolicy random(Rng::mix(1, i));
        DegreePolicy degree;
        NeuralPolicy neural(model);
        Policy* policies[] = {&random, &degree, &neural};
        for (Policy* p : policies) {
            auto out = run_search(pair.query, pair.target, *p);
            CHECK(out.matches.size() == expected.size());
            CHECK(as_set(out.matches) == expected);
        }
    }
}

TEST_CASE("every emitted match verifies") {
    for (std::size_t i = 0; i < 30; ++i) {
        auto pair = corpus_pair(i);
        RandomPolicy policy(Rng::mix(5, i));
        auto out = run_search(pair.query, pair.target, policy);
        for (const auto& m : out.matches) CHECK(verify_match(pair.query, pair.target, m));
    }
}

TEST_CASE("nlf never increases step count on solvable pairs") {
    for (std::size_t i = 0; i < 40; ++i) {
        auto pair = corpus_pair(i);
        auto ldf = ldf_filter(pair.query, pair.target);
        auto nlf = nlf_filter(pair.query, pair.target, ldf);
        if (ldf.any_empty()) continue;
        IdentityPolicy policy;
        auto order_ldf = order_query_nodes(pair.query, ldf);
        auto order_nlf = order_query_nodes(pair.query, nlf);
        auto a = backtracking_search(pair.query, pair.target, ldf, order_ldf, policy, {});
        auto b = backtracking_search(pair.query, pair.target, nlf, order_nlf, policy, {});
        CHECK(as_set(a.matches) == as_set(b.matches));
        if (!a.matches.empty()) CHECK(b.steps <= a.steps);
    }
}

TEST_CASE("promise restart score formula") {
    CHECK(promise_restart_score(4, 8, 0, 5) == doctest::Approx(2.0 / 3.0));
    CHECK(promise_restart_score(0, 8, 5, 5) == doctest::Approx(0.0));
    CHECK(promise_restart_score(8, 8, 0, 3) == doctest::Approx(1.0));
}

TEST_CASE("restarts reorder exploration but never lose matches") {
    for (std::size_t i = 0; i < 60; ++i) {
        auto pair = corpus_pair(i);
        IdentityPolicy policy;
        SearchBudget plain;
        plain.enable_restarts = false;
        SearchBudget eager;
        eager.enable_restarts = true;
        eager.restart_threshold = 1;  // restart at every opportunity
        eager.restart_budget = 0;     // unlimited
        auto a = run_search(pair.query, pair.target, policy, plain);
        auto b = run_search(pair.query, pair.target, policy, eager);
        CHECK(as_set(a.matches) == as_set(b.matches));
        CHECK(a.steps == b.steps);  // same set of expansions, different order
    }
}

TEST_CASE("restart jumps actually happen and respect the budget") {
    // A query with a dead-end-heavy search: star query into a sparse target.
    std::size_t restarts_seen = 0;
    for (std::size_t i = 0; i < 120 && restarts_seen == 0; ++i) {
        auto pair = corpus_pair(i);
        RandomPolicy policy(Rng::mix(17, i));
        SearchBudget b;
        b.restart_threshold = 1;
        b.restart_budget = 7;
        auto out = run_search(pair.query, pair.target, policy, b);
        CHECK(out.restarts <= 7);
        restarts_seen += out.restarts;
    }
    CHECK(restarts_seen > 0);
}

TEST_CASE("searches are deterministic for a fixed policy seed") {
    for (std::size_t i = 0; i < 10; ++i) {
        auto pair = corpus_pair(i);
        RandomPolicy p1(Rng::mix(3, i)), p2(Rng::mix(3, i));
        auto a = run_search(pair.query, pair.target, p1);
        auto b = run_search(pair.query, pair.target, p2);
        CHECK(a.matches == b.matches);
        CHECK(a.steps == b.steps);
    }
}

TEST_CASE("budget limits are honored and reported") {
    auto pair = corpus_pair(0);
    RandomPolicy policy(1);
    SearchBudget b;
    b.max_steps = 3;
    auto out = run_search(pair.query, pair.target, policy, b);
    CHECK(out.steps <= 3);
    CHECK(out.budget_exhausted);

    SearchBudget cap;
    cap.solution_cap = 1;
    auto first = run_search(pair.query, pair.target, policy, cap);
    CHECK(first.matches.size() <= 1);
}

TEST_CASE("solution cap of zero stops immediately") {
    auto tri = parse_graph(std::string("t 3 3\nv 0 0 2\nv 1 0 2\nv 2 0 2\ne 0 1\ne 0 2\ne 1 2\n"));
    IdentityPolicy policy;
    SearchBudget b;
    b.solution_cap = 0;
    auto out = run_search(tri, tri, policy, b);
    CHECK(out.matches.empty());
    CHECK(out.steps == 0);
}

TEST_CASE("brute force oracle basics") {
    auto tri = parse_graph(std::string("t 3 3\nv 0 0 2\nv 1 0 2\nv 2 0 2\ne 0 1\ne 0 2\ne 1 2\n"));
    CHECK(brute_force_oracle(tri, tri).size() == 6);
    auto q = parse_graph(std::string("t 1 0\nv 0 9 0\n"));
    CHECK(brute_force_oracle(q, tri).empty());
}

TEST_CASE("search output format") {
    auto tri = parse_graph(std::string("t 3 3\nv 0 0 2\nv 1 0 2\nv 2 0 2\ne 0 1\ne 0 2\ne 1 2\n"));
    IdentityPolicy policy;
    SearchBudget b;
    b.solution_cap = 1;
    auto out = run_search(tri, tri, policy, b);
    auto text = format_search_output(out, true);
    CHECK(text.find("M 0:") == 0);
    CHECK(text.find("\nS 3 3 1\n") != std::string::npos);
}
