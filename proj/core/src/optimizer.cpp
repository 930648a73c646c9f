#include "sgm/optimizer.hpp"

#include <cmath>

namespace sgm {

double AdamW::global_grad_norm(const ParamStore& params) {
    double sq = 0;
    for (std::size_t i = 0; i < params.size(); ++i)
        for (std::size_t j = 0; j < params.entry(i).grad.size(); ++j) {
            double g = params.entry(i).grad[j];
            sq += g * g;
        }
    return std::sqrt(sq);
}

void AdamW::clip_global_norm(ParamStore& params, double max_norm) {
    double norm = global_grad_norm(params);
    if (norm <= max_norm || norm == 0.0) return;
    double s = max_norm / norm;
    for (std::size_t i = 0; i < params.size(); ++i)
        for (std::size_t j = 0; j < params.entry(i).grad.size(); ++j)
            params.entry(i).grad[j] *= s;
}

bool AdamW::step(ParamStore& params) {
    double norm = global_grad_norm(params);
    if (!std::isfinite(norm)) {
        ++skipped_;
        return false;
    }
    clip_global_norm(params, cfg_.clip_norm);

    ++steps_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        ParamEntry& e = params.entry(i);
        for (std::size_t j = 0; j < e.value.size(); ++j) {
            double g = e.grad[j];
            e.m[j] = cfg_.beta1 * e.m[j] + (1.0 - cfg_.beta1) * g;
            e.v[j] = cfg_.beta2 * e.v[j] + (1.0 - cfg_.beta2) * g * g;
            double mhat = e.m[j] / bc1;
            double vhat = e.v[j] / bc2;
            double p = e.value[j];
            e.value[j] = p - cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps) -
                         cfg_.lr * cfg_.weight_decay * p;
        }
    }
    return true;
}

}  // namespace sgm
