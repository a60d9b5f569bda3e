#pragma once

#include "palseg/train/config.hpp"

namespace palseg::train {

struct LrPair {
    double head = 0.0;
    double encoder = 0.0;
};

/// Cosine annealing pinned at both ends:
///   lr(e) = lr_min + (lr_head - lr_min) * (1 + cos(pi * e / (epochs-1))) / 2
/// The encoder group runs at lr / encoder_lr_divisor. A single-epoch
/// schedule degenerates to the initial rate.
LrPair cosine_lr(int epoch, const TrainConfig& cfg);

/// Weight decay per group; the encoder decay is divided like its rate.
struct WdPair {
    double head = 0.0;
    double encoder = 0.0;
};
WdPair group_weight_decay(const TrainConfig& cfg);

} // namespace palseg::train
