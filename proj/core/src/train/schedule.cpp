#include "palseg/train/schedule.hpp"

#include <cmath>
#include <numbers>

#include "palseg/common/check.hpp"

namespace palseg::train {

LrPair cosine_lr(int epoch, const TrainConfig& cfg) {
    PALSEG_CHECK(epoch >= 0 && epoch < cfg.epochs, "epoch ", epoch,
                 " outside schedule range [0, ", cfg.epochs, ")");
    double lr = cfg.lr_head;
    if (cfg.epochs > 1) {
        const double t = static_cast<double>(epoch) / (cfg.epochs - 1);
        lr = cfg.lr_min + 0.5 * (cfg.lr_head - cfg.lr_min) * (1.0 + std::cos(std::numbers::pi * t));
    }
    return {lr, lr / cfg.encoder_lr_divisor};
}

WdPair group_weight_decay(const TrainConfig& cfg) {
    return {cfg.weight_decay, cfg.weight_decay / cfg.encoder_lr_divisor};
}

} // namespace palseg::train
