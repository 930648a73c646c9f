#pragma once

#include <deque>
#include <iosfwd>
#include <optional>

#include "sgm/loss.hpp"
#include "sgm/model.hpp"
#include "sgm/optimizer.hpp"
#include "sgm/rng.hpp"
#include "sgm/sampler.hpp"
#include "sgm/signals.hpp"

namespace sgm {

/// Bounded FIFO of training samples with uniform without-replacement batches.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 128) : capacity_(capacity) {}

    void push(TrainingSample s) {
        if (buf_.size() == capacity_) buf_.pop_front();
        buf_.push_back(std::move(s));
    }
    std::size_t size() const { return buf_.size(); }
    std::size_t capacity() const { return capacity_; }
    const TrainingSample& at(std::size_t i) const { return buf_[i]; }

    std::vector<const TrainingSample*> sample_batch(std::size_t n, Rng& rng) const;

private:
    std::size_t capacity_;
    std::deque<TrainingSample> buf_;
};

struct TrainerConfig {
    std::vector<std::size_t> curriculum = {8, 16, 24, 32, 48, 64, 96, 128};
    std::size_t buffer_capacity = 128;
    std::size_t batch_size = 32;
    std::size_t batches_per_iteration = 4;
    std::size_t search_step_limit = 20000;   // signal-collecting search budget
    std::size_t search_solution_cap = 16;    // bounds tree size and signal volume
    std::size_t val_step_limit = 10000;      // per validation pair
    std::size_t validate_every = 5;          // iterations between validations
    double margin = 1.0;
    OptimizerConfig opt;
    std::uint64_t seed = 1;
};

struct Checkpoint {
    std::vector<Tensor> values;
    double reward = -1e300;
    std::size_t iteration = 0;
};

struct IterationReport {
    std::size_t iter = 0;
    double loss_la = 0, loss_mm = 0, loss_total = 0;
    std::size_t buffer_size = 0;
    std::size_t optimizer_steps = 0;
    std::size_t samples_collected = 0;
    std::size_t solutions_found = 0;
    std::size_t skipped_pairs = 0;
    std::optional<double> val_reward;
    std::optional<bool> accepted;
};

/// Mean of the best matched-prefix sizes over a validation sweep.
double mean_best_size(std::span<const std::size_t> best_sizes);

/// Self-supervised training loop bound to one target graph: sample a query,
/// search with the current policy, harvest solution-path signals into the
/// replay buffer, take optimizer batches, and periodically validate with a
/// strict-improvement accept/revert rule.
class Trainer {
public:
    Trainer(std::shared_ptr<const LabeledGraph> target, PolicyModel& model, TrainerConfig cfg);

    /// Samples validation queries (3 per size in {8,16,32,64,128}, sizes
    /// capped at the target size) that are not isomorphic to anything in
    /// `avoid`; training queries are kept disjoint from them too.
    void build_validation_set(const std::vector<const LabeledGraph*>& avoid = {});

    /// Training queries are resampled until not isomorphic to any of these
    /// (held-out test sets stay held out).
    void avoid_queries(std::vector<const LabeledGraph*> avoid) { avoid_ = std::move(avoid); }

    IterationReport run_iteration();

    /// Runs the step-budgeted validation sweep; accepts the model only on a
    /// strict reward improvement, otherwise restores the best checkpoint
    /// bit-exact. Requires build_validation_set to have run.
    IterationReport& validate_and_checkpoint(IterationReport& report);

    const Checkpoint& best() const { return best_; }
    const std::vector<IterationReport>& history() const { return history_; }
    const std::vector<SampledQuery>& validation_set() const { return validation_; }
    ReplayBuffer& buffer() { return buffer_; }
    AdamW& optimizer() { return opt_; }

    /// `iter,loss_la,loss_mm,loss_total,buffer_size,val_reward,accepted`
    static void write_log_csv(std::ostream& out, const std::vector<IterationReport>& reports);

private:
    double run_validation_sweep();

    std::shared_ptr<const LabeledGraph> target_;
    PolicyModel& model_;
    TrainerConfig cfg_;
    Rng rng_;
    ReplayBuffer buffer_;
    AdamW opt_;
    std::vector<SampledQuery> validation_;
    Checkpoint best_;
    std::vector<IterationReport> history_;
    std::size_t iter_ = 0;
};

}  // namespace sgm
