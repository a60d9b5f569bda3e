#pragma once

#include <iosfwd>

#include "palseg/metrics/confusion.hpp"
#include "palseg/nn/checkpoint.hpp"
#include "palseg/train/adam.hpp"
#include "palseg/train/config.hpp"
#include "palseg/train/schedule.hpp"

namespace palseg::train {

/// Mean per-pixel cross-entropy over non-ignored pixels, plus the scored
/// pixel count (0 means every pixel was ignored and the loss is 0).
nn::CeLoss<float> loss(const nn::VarPtr<float>& logits,
                       const nn::Tensor<std::int32_t>& labels, int ignore_id);

/// Frozen-model evaluation of one split: eval-mode forward, argmax,
/// confusion-matrix accumulation over every sample.
metrics::IouReport evaluate_split(nn::SegNet<float>& model,
                                  const data::DatasetManifest& manifest, data::Split split,
                                  const data::Normalization& norm);

struct FitResult {
    std::string best_checkpoint;
    std::string last_checkpoint;
    std::string log_path;
    double best_miou = 0.0;
    int epochs_run = 0;
};

/// Recovers the normalization a checkpoint was trained with from its
/// extra metadata; falls back to the defaults when absent.
data::Normalization normalization_from_extra(const std::string& extra_json);

/// Full training loop: per-epoch cosine rates with the encoder group at
/// rate/divisor, Adam updates, test-split evaluation each epoch, JSONL
/// logging, and best/last checkpoints under `out_dir`. With `resume` the
/// run continues from <out_dir>/last.ckpt on an identical remaining
/// schedule. Optimizer moments restart on resume; model weights, epoch
/// position and the best metric carry over. `epoch_limit` >= 0 checkpoints
/// and stops after that many epochs of this invocation (time-boxed runs).
FitResult fit(nn::SegNet<float>& model, const data::DatasetManifest& manifest,
              const TrainConfig& cfg, const std::string& out_dir, bool resume = false,
              std::ostream* progress = nullptr, int epoch_limit = -1);

} // namespace palseg::train
