#include "sgm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <ostream>

#include "sgm/isomorphism.hpp"
#include "sgm/policies.hpp"

namespace sgm {

std::vector<const TrainingSample*> ReplayBuffer::sample_batch(std::size_t n, Rng& rng) const {
    n = std::min(n, buf_.size());
    std::vector<std::size_t> idx(buf_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
        std::swap(idx[i], idx[j]);
    }
    std::vector<const TrainingSample*> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = &buf_[idx[i]];
    return out;
}

double mean_best_size(std::span<const std::size_t> best_sizes) {
    if (best_sizes.empty()) return 0;
    double s = 0;
    for (std::size_t b : best_sizes) s += static_cast<double>(b);
    return s / static_cast<double>(best_sizes.size());
}

Trainer::Trainer(std::shared_ptr<const LabeledGraph> target, PolicyModel& model, TrainerConfig cfg)
    : target_(std::move(target)),
      model_(model),
      cfg_(std::move(cfg)),
      rng_(Rng::mix(cfg_.seed, 0x7261696e)),
      buffer_(cfg_.buffer_capacity),
      opt_(cfg_.opt) {
    if (cfg_.curriculum.empty()) throw std::invalid_argument("curriculum must be nonempty");
    best_.values = model_.params().snapshot_values();
}

void Trainer::build_validation_set(const std::vector<const LabeledGraph*>& avoid) {
    validation_.clear();
    const std::size_t sizes[] = {8, 16, 32, 64, 128};
    for (std::size_t size : sizes) {
        if (size > target_->num_nodes()) continue;
        for (int i = 0; i < 3; ++i) {
            for (int attempt = 0;; ++attempt) {
                std::uint64_t s = Rng::mix(cfg_.seed, 0x76a10000 + size * 64 + i * 8 + attempt);
                double p = std::exp(std::log(1e-3) + Rng(s).next_double() * std::log(1e6));
                SampledQuery sq;
                try {
                    sq = random_walk_sample(*target_, size, p, s);
                } catch (const SampleError&) {
                    if (attempt > 20) throw;
                    continue;
                }
                bool clash = false;
                for (const auto& other : validation_)
                    if (other.query.num_nodes() == size && isomorphic_check(sq.query, other.query))
                        clash = true;
                for (const auto* g : avoid)
                    if (g && g->num_nodes() == size && isomorphic_check(sq.query, *g)) clash = true;
                if (!clash || attempt > 20) {
                    validation_.push_back(std::move(sq));
                    break;
                }
            }
        }
    }
}

double Trainer::run_validation_sweep() {
    std::vector<std::size_t> best_sizes;
    for (const auto& vq : validation_) {
        auto problem = SearchProblem::build(target_, vq.query);
        NeuralPolicy policy(model_);
        SearchBudget budget;
        budget.max_steps = cfg_.val_step_limit;
        budget.solution_cap = 1;
        auto outcome = backtracking_search(problem.query, *problem.target, problem.candidates,
                                           problem.order, policy, budget);
        best_sizes.push_back(outcome.max_depth);
    }
    return mean_best_size(best_sizes);
}

IterationReport& Trainer::validate_and_checkpoint(IterationReport& report) {
    double reward = run_validation_sweep();
    report.val_reward = reward;
    if (reward > best_.reward) {
        best_.values = model_.params().snapshot_values();
        best_.reward = reward;
        best_.iteration = iter_;
        report.accepted = true;
    } else {
        model_.params().restore_values(best_.values);
        report.accepted = false;
    }
    return report;
}

IterationReport Trainer::run_iteration() {
    IterationReport report;
    report.iter = ++iter_;

    // 1. Sample a query of a curriculum size, disjoint from validation queries.
    std::size_t size = cfg_.curriculum[rng_.below(cfg_.curriculum.size())];
    size = std::min(size, target_->num_nodes());
    std::optional<SampledQuery> query;
    for (int attempt = 0; attempt < 20 && !query; ++attempt) {
        std::uint64_t s = Rng::mix(cfg_.seed, iter_ * 1024 + attempt);
        double p = std::exp(std::log(1e-3) + rng_.next_double() * std::log(1e6));
        SampledQuery sq;
        try {
            sq = random_walk_sample(*target_, size, p, s);
        } catch (const SampleError&) {
            continue;
        }
        bool clash = false;
        for (const auto& other : validation_)
            if (other.query.num_nodes() == size && isomorphic_check(sq.query, other.query))
                clash = true;
        if (!clash) query = std::move(sq);
    }

    // 2. Search with the current policy and harvest solution-path signals.
    if (query) {
        auto problem = std::make_shared<SearchProblem>(SearchProblem::build(target_, query->query));
        NeuralPolicy policy(model_);
        SearchBudget budget;
        budget.max_steps = cfg_.search_step_limit;
        budget.solution_cap = cfg_.search_solution_cap;
        auto outcome = backtracking_search(problem->query, *problem->target, problem->candidates,
                                           problem->order, policy, budget, /*collect_tree=*/true);
        report.solutions_found = outcome.matches.size();
        if (outcome.tree && !outcome.tree->solution_leaves.empty()) {
            auto samples = collect_training_signals(*outcome.tree, problem);
            report.samples_collected = samples.size();
            for (auto& s : samples) {
                sample_negatives(s, Rng::mix(cfg_.seed, iter_ * 4096 + s.depth));
                buffer_.push(std::move(s));
            }
        }
    }
    report.buffer_size = buffer_.size();

    // 3. Optimizer batches from the replay buffer.
    if (buffer_.size() > 0) {
        double sum_la = 0, sum_mm = 0, sum_total = 0;
        std::size_t batches_done = 0;
        for (std::size_t b = 0; b < cfg_.batches_per_iteration; ++b) {
            auto batch = buffer_.sample_batch(cfg_.batch_size, rng_);
            if (batch.empty()) break;
            model_.params().zero_grads();

            // Group by problem so each graph pair's intra chain is recorded once.
            std::map<const SearchProblem*, std::vector<const TrainingSample*>> groups;
            for (const auto* s : batch) groups[s->problem.get()].push_back(s);
            double batch_la = 0, batch_mm = 0, batch_total = 0;
            std::size_t batch_pairs = 0;
            for (auto& [prob, members] : groups) {
                Tape tape;
                auto intra = model_.intra_forward(tape, prob->query, *prob->target);
                std::vector<ValueId> totals;
                for (const auto* s : members) {
                    LossTerms t = total_loss_with_intra(tape, model_, *s, intra, cfg_.margin);
                    totals.push_back(t.total);
                    batch_la += tape.value(t.la)[0];
                    batch_mm += tape.value(t.mm)[0];
                    batch_total += tape.value(t.total)[0];
                    batch_pairs += t.pairs;
                    report.skipped_pairs += t.skipped_pairs;
                }
                ValueId group_sum = totals[0];
                for (std::size_t i = 1; i < totals.size(); ++i)
                    group_sum = tape.add(group_sum, totals[i]);
                tape.backward(tape.scale(group_sum, 1.0 / static_cast<double>(batch.size())));
            }
            if (opt_.step(model_.params())) {
                ++batches_done;
                ++report.optimizer_steps;
                // per-pair means: comparable across batches of different sizes
                double denom = batch_pairs ? static_cast<double>(batch_pairs) : 1.0;
                sum_la += batch_la / denom;
                sum_mm += batch_mm / denom;
                sum_total += batch_total / denom;
            }
        }
        if (batches_done > 0) {
            report.loss_la = sum_la / static_cast<double>(batches_done);
            report.loss_mm = sum_mm / static_cast<double>(batches_done);
            report.loss_total = sum_total / static_cast<double>(batches_done);
        }
    }

    // 4. Periodic validation with accept/revert.
    if (!validation_.empty() && cfg_.validate_every > 0 && iter_ % cfg_.validate_every == 0)
        validate_and_checkpoint(report);

    history_.push_back(report);
    return report;
}

void Trainer::write_log_csv(std::ostream& out, const std::vector<IterationReport>& reports) {
    out << "iter,loss_la,loss_mm,loss_total,buffer_size,val_reward,accepted\n";
    for (const auto& r : reports) {
        out << r.iter << ',';
        if (r.optimizer_steps > 0)
            out << r.loss_la << ',' << r.loss_mm << ',' << r.loss_total << ',';
        else
            out << ",,,";
        out << r.buffer_size << ',';
        if (r.val_reward) out << *r.val_reward;
        out << ',';
        if (r.accepted) out << (*r.accepted ? 1 : 0);
        out << '\n';
    }
}

}  // namespace sgm
