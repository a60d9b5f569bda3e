#pragma once

#include <string>

#include "palseg/nn/tensor.hpp"

namespace palseg::data {

/// One segmentation sample: image as [3, H, W] reals in [0, 1], label as
/// [H, W] class ids, and an optional blind-area mask (empty = all valid).
struct SegSample {
    std::string id;
    nn::Tensor<float> image;
    nn::Tensor<std::uint8_t> label;
    nn::Tensor<std::uint8_t> valid_mask;

    int height() const { return static_cast<int>(label.dim(0)); }
    int width() const { return static_cast<int>(label.dim(1)); }
    bool has_mask() const { return !valid_mask.empty(); }
};

} // namespace palseg::data
