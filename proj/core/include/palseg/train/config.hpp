#pragma once

#include <cstdint>
#include <string>

#include "palseg/data/augment.hpp"
#include "palseg/data/loader.hpp"
#include "palseg/nn/segnet.hpp"

namespace palseg::train {

/// Optimization recipe. The stated annealing minimum equals the initial
/// rate in the source material, which would freeze the schedule; the
/// default here anneals to 5e-6 and the literal value remains available
/// through `lr_min`.
struct TrainConfig {
    double lr_head = 5e-4;
    double lr_min = 5e-6;
    double weight_decay = 1e-4;
    double encoder_lr_divisor = 4.0;
    int epochs = 100;
    int batch_size = 6;
    std::uint64_t seed = 1;
    bool decoupled_weight_decay = false;

    data::AugmentConfig augment; // crop 512x512, scale [0.5, 2], hflip
    data::Normalization normalization;
    nn::ModelConfig model = nn::ModelConfig::resnet18_default();

    void validate() const;
};

std::string train_config_to_json_text(const TrainConfig& cfg);
TrainConfig train_config_from_json_text(const std::string& text);
TrainConfig load_train_config(const std::string& path);

} // namespace palseg::train
