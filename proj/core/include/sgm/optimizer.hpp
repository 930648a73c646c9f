#pragma once

#include "sgm/params.hpp"

namespace sgm {

struct OptimizerConfig {
    double lr = 0.0005;
    double eps = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double weight_decay = 0.01;
    double clip_norm = 0.1;
};

/// AdamW with bias correction, a global-norm gradient clip applied before the
/// update, and decoupled weight decay (p -= lr * wd * p, independent of the
/// adaptive term). Steps with non-finite gradients are skipped and counted.
class AdamW {
public:
    explicit AdamW(OptimizerConfig cfg = {}) : cfg_(cfg) {}

    /// Returns false when the step was skipped because of non-finite grads.
    bool step(ParamStore& params);

    std::size_t steps() const { return steps_; }
    std::size_t skipped() const { return skipped_; }
    const OptimizerConfig& config() const { return cfg_; }

    static double global_grad_norm(const ParamStore& params);
    /// Scales all gradients so the global norm is at most max_norm.
    static void clip_global_norm(ParamStore& params, double max_norm);

private:
    OptimizerConfig cfg_;
    std::size_t steps_ = 0;
    std::size_t skipped_ = 0;
};

}  // namespace sgm
