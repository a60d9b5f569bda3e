#pragma once

#include "palseg/common/image.hpp"
#include "palseg/data/manifest.hpp"
#include "palseg/data/sample.hpp"

namespace palseg::data {

/// [3, H, W] float tensor in [0, 1]; gray inputs are replicated to 3
/// channels.
nn::Tensor<float> image_to_tensor(const ImageU8& img);

/// Back to an interleaved 8-bit image (values clamped to [0, 1]).
ImageU8 tensor_to_image(const nn::Tensor<float>& t);

nn::Tensor<std::uint8_t> label_to_tensor(const ImageU8& img);

/// Reads image/label (and mask when listed). Blind-area pixels are forced
/// to the catalog's ignore id so they drop out of loss and metrics.
SegSample load_sample(const DatasetManifest& manifest, const ManifestEntry& entry);

/// Per-channel normalization applied when a sample becomes network input.
struct Normalization {
    std::array<float, 3> mean{0.485f, 0.456f, 0.406f};
    std::array<float, 3> stddev{0.229f, 0.224f, 0.225f};
};

/// Stacks samples into [N,3,H,W] input and [N,H,W] int32 labels; all
/// samples must share one size.
void make_batch(const std::vector<SegSample>& samples, const Normalization& norm,
                nn::Tensor<float>& images, nn::Tensor<std::int32_t>& labels);

} // namespace palseg::data
