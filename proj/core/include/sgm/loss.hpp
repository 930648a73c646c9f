#pragma once

#include "sgm/model.hpp"
#include "sgm/signals.hpp"
#include "sgm/tape.hpp"

namespace sgm {

inline constexpr double kProbClamp = 1e-7;

struct LossTerms {
    ValueId la = 0;
    ValueId mm = 0;
    ValueId total = 0;
    std::size_t pairs = 0;          // evaluable pairs the terms sum over
    std::size_t skipped_pairs = 0;  // pairs outside the state's candidate structure
};

/// Look-ahead cross entropy: for every positive pair -log sigma(logit) and for
/// every negative -log(1 - sigma(logit)), with all logits evaluated at the
/// sample's own state and probabilities clamped to [1e-7, 1-1e-7]. Pairs whose
/// target is not in the state's candidate structure are skipped and counted.
ValueId look_ahead_loss(Tape& tape, PolicyModel& model, const TrainingSample& sample,
                        std::size_t* skipped = nullptr);

/// Hinge loss on the containment error E(h_u, h_v) = ||max(0, h_u - h_v)||^2:
/// positives contribute E, negatives max(0, margin - E).
ValueId max_margin_loss(Tape& tape, PolicyModel& model, const TrainingSample& sample,
                        double margin, std::size_t* skipped = nullptr);

/// Both terms over one shared encoding of the sample's state; total = la + mm.
LossTerms total_loss(Tape& tape, PolicyModel& model, const TrainingSample& sample,
                     double margin = 1.0);

/// Variant of total_loss on top of already-recorded intra embeddings, so a
/// batch over the same graph pair shares the intra computation.
LossTerms total_loss_with_intra(Tape& tape, PolicyModel& model, const TrainingSample& sample,
                                const PolicyModel::IntraOnTape& intra, double margin = 1.0);

}  // namespace sgm
