#pragma once

#include <cstdint>

#include "palseg/data/sample.hpp"

namespace palseg::data {

/// Training-time augmentation: uniform random scale, coin-flip horizontal
/// mirror, and a random crop to a fixed output size (short sides padded
/// with zeros / the ignore id).
struct AugmentConfig {
    int crop_h = 512;
    int crop_w = 512;
    double scale_min = 0.5;
    double scale_max = 2.0;
    bool hflip = true;
    int ignore_id = 255;

    void validate() const;
};

/// The geometric transform actually applied, recorded so a label can be
/// re-warped independently and compared pixel-exactly.
struct AugmentRecord {
    double scale = 1.0;
    bool flipped = false;
    int scaled_h = 0;
    int scaled_w = 0;
    int crop_y = 0;
    int crop_x = 0;
};

/// Deterministic under a fixed seed. The image is resampled bilinearly,
/// the label and validity mask with nearest-neighbor; all three get the
/// identical transform.
SegSample augment(const SegSample& sample, std::uint64_t seed, const AugmentConfig& cfg,
                  AugmentRecord* record = nullptr);

/// Replays a recorded transform on a label map (nearest semantics).
nn::Tensor<std::uint8_t> apply_record_to_label(const nn::Tensor<std::uint8_t>& label,
                                               const AugmentRecord& record,
                                               const AugmentConfig& cfg);

} // namespace palseg::data
