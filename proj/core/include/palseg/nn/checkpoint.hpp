#pragma once

#include <string>

#include "palseg/nn/segnet.hpp"

namespace palseg::nn {

/// Metadata carried next to the flat tensor map in a checkpoint file.
struct CheckpointMeta {
    std::string config_json;      // ModelConfig of the saved model
    int epoch = 0;
    double best_metric = 0.0;
    std::string extra_json = "{}"; // free-form (training state, rng, ...)
};

/// Writes every parameter and buffer as a flat path->tensor map with a
/// JSON metadata header (paths, shapes, dtype, config hash).
template <typename T>
void save_checkpoint(const std::string& path, const SegNet<T>& model,
                     const CheckpointMeta& meta);

/// Loads tensors into an already-built model. Every model path must be
/// present with a matching shape; offending paths are listed in the
/// error. A config-hash mismatch fails unless `allow_config_mismatch`.
template <typename T>
CheckpointMeta load_checkpoint(const std::string& path, SegNet<T>& model,
                               bool allow_config_mismatch = false);

/// Header-only read, e.g. to rebuild the model from the stored config.
CheckpointMeta read_checkpoint_meta(const std::string& path);

/// Copies encoder weights ("encoder." paths) from a checkpoint-format
/// container; shape mismatches are reported per path.
template <typename T>
void load_pretrained_encoder(SegNet<T>& model, const std::string& path);

extern template void save_checkpoint<float>(const std::string&, const SegNet<float>&,
                                            const CheckpointMeta&);
extern template void save_checkpoint<double>(const std::string&, const SegNet<double>&,
                                             const CheckpointMeta&);
extern template CheckpointMeta load_checkpoint<float>(const std::string&, SegNet<float>&,
                                                      bool);
extern template CheckpointMeta load_checkpoint<double>(const std::string&, SegNet<double>&,
                                                       bool);
extern template void load_pretrained_encoder<float>(SegNet<float>&, const std::string&);
extern template void load_pretrained_encoder<double>(SegNet<double>&, const std::string&);

} // namespace palseg::nn
