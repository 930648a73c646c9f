#include <benchmark/benchmark.h>

#include "sgm/loss.hpp"
#include "sgm/oracle.hpp"
#include "sgm/policies.hpp"
#include "sgm/problem.hpp"
#include "sgm/signals.hpp"
#include "support/corpus.hpp"

using namespace sgm;
using namespace sgm::testsupport;

namespace {

std::shared_ptr<const LabeledGraph> bench_target() {
    static auto g = std::make_shared<const LabeledGraph>(ba_graph(1000, 3, 4, 4711));
    return g;
}

void BM_filter_pipeline(benchmark::State& state) {
    auto target = bench_target();
    auto sq = random_walk_sample(*target, 16, 1.0, 7);
    for (auto _ : state) {
        auto C = nlf_filter(sq.query, *target, ldf_filter(sq.query, *target));
        benchmark::DoNotOptimize(C);
    }
}
BENCHMARK(BM_filter_pipeline);

void BM_search_random_policy(benchmark::State& state) {
    auto target = bench_target();
    auto sq = random_walk_sample(*target, static_cast<std::size_t>(state.range(0)), 1.0, 11);
    auto problem = SearchProblem::build(target, sq.query);
    for (auto _ : state) {
        RandomPolicy policy(123);
        SearchBudget budget;
        budget.max_steps = 2000;
        budget.solution_cap = 1;
        auto out = backtracking_search(problem.query, *problem.target, problem.candidates,
                                       problem.order, policy, budget);
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_search_random_policy)->Arg(8)->Arg(16)->Arg(32);

void BM_encode_per_state(benchmark::State& state) {
    auto target = bench_target();
    auto sq = random_walk_sample(*target, 16, 1.0, 13);
    auto problem = SearchProblem::build(target, sq.query);
    PolicyModel model(EncoderConfig{}, 1);
    EmbeddingCache cache;
    std::vector<NodeId> mapped(problem.query.num_nodes(), kNoNode);
    std::vector<std::uint8_t> used(target->num_nodes(), 0);
    NodeId u0 = problem.order.order[0];
    auto ctx = build_state_context(problem.query, *target, problem.candidates, mapped, used);
    Tape tape;
    for (auto _ : state) {
        tape.reset();
        auto enc = model.encode(tape, problem.query, *target, ctx, ctx.future[u0], &cache);
        benchmark::DoNotOptimize(enc);
    }
}
BENCHMARK(BM_encode_per_state);

void BM_loss_backward(benchmark::State& state) {
    auto target = std::make_shared<const LabeledGraph>(ba_graph(200, 3, 3, 99));
    auto sq = random_walk_sample(*target, 8, 1.0, 17);
    auto problem = std::make_shared<SearchProblem>(SearchProblem::build(target, sq.query));
    RandomPolicy policy(3);
    SearchBudget budget;
    budget.max_steps = 5000;
    budget.solution_cap = 4;
    auto out = backtracking_search(problem->query, *problem->target, problem->candidates,
                                   problem->order, policy, budget, true);
    auto samples = collect_training_signals(*out.tree, problem);
    if (samples.empty()) {
        state.SkipWithError("no samples");
        return;
    }
    sample_negatives(samples[0], 5);
    PolicyModel model(EncoderConfig{}, 2);
    for (auto _ : state) {
        Tape tape;
        auto t = total_loss(tape, model, samples[0]);
        model.params().zero_grads();
        tape.backward(t.total);
        benchmark::DoNotOptimize(model.params());
    }
}
BENCHMARK(BM_loss_backward);

}  // namespace

BENCHMARK_MAIN();
