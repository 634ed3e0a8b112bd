#pragma once

#include <cstdint>

#include "pax/loss.hpp"

namespace pax {

struct TrainingConfig {
    double epsilon_global = 1.0 / 255.0;  // global error tolerance budget
    int max_rounds = 100;                 // one tree per round; 0 trains nothing
    double lambda = 1.0;                  // L2 penalty on leaf weights
    double gamma = 0.0;                   // per-leaf growth penalty
    double learning_rate = 0.3;
    int max_depth = 6;
    double min_gain = 0.0;  // split accepted iff gain > min_gain
    LossKind loss = LossKind::BinaryLogistic;

    // Parties compute gradients on bin representatives when set; on raw
    // feature values otherwise.
    bool quantize_predict = true;

    // Optional early stop: quit once the round-over-round training loss
    // improvement stays below tol for patience consecutive rounds.
    bool early_stop = false;
    double early_stop_tol = 1e-6;
    int early_stop_patience = 5;

    void validate() const;
};

// Bin count implied by a rank-error budget: max(1, floor(1/eps)).
int bins_for_epsilon(double eps);

// Inverse of the above for the CLI's --bins flag.
double epsilon_for_bins(int bins);

}  // namespace pax
