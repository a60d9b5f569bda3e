#pragma once

#include <cstdint>

#include "palseg/nn/autodiff.hpp"

namespace palseg::nn {

/// 2-D convolution (cross-correlation), NCHW. `w` is [Cout, Cin, kh, kw],
/// `b` is [Cout] or null. Output spatial dims follow the usual
/// floor((H + 2p - k) / s) + 1 rule.
template <typename T>
VarPtr<T> conv2d(const VarPtr<T>& x, const VarPtr<T>& w, const VarPtr<T>& b,
                 int stride_h, int stride_w, int pad_h, int pad_w);

template <typename T>
VarPtr<T> conv2d(const VarPtr<T>& x, const VarPtr<T>& w, const VarPtr<T>& b,
                 int stride, int pad) {
    return conv2d(x, w, b, stride, stride, pad, pad);
}

/// Sequential 3x1 then 1x3 convolution, padded to keep the spatial size.
/// Linear by construction; covers the same 3x3 receptive field with
/// 6*C^2 weights instead of 9*C^2.
template <typename T>
VarPtr<T> separable_blend(const VarPtr<T>& x, const VarPtr<T>& w31, const VarPtr<T>& w13,
                          const VarPtr<T>& b31 = nullptr, const VarPtr<T>& b13 = nullptr);

/// Square-kernel average pooling. With `exclude_pad` the divisor counts
/// only in-bounds taps, so constant fields stay constant.
template <typename T>
VarPtr<T> avg_pool2d(const VarPtr<T>& x, int kernel, int stride, int padding,
                     bool exclude_pad = true);

template <typename T>
VarPtr<T> max_pool2d(const VarPtr<T>& x, int kernel, int stride, int padding);

/// Mean over the spatial dims, output [N, C, 1, 1].
template <typename T>
VarPtr<T> global_avg_pool(const VarPtr<T>& x);

/// Bilinear resize with half-pixel-center sampling; a 1x1 input
/// broadcasts.
template <typename T>
VarPtr<T> upsample_bilinear(const VarPtr<T>& x, int out_h, int out_w);

template <typename T>
VarPtr<T> relu(const VarPtr<T>& x);

template <typename T>
VarPtr<T> add(const VarPtr<T>& a, const VarPtr<T>& b);

template <typename T>
VarPtr<T> concat_channels(const std::vector<VarPtr<T>>& xs);

/// Batch normalization over N, H, W per channel. In training mode the
/// batch statistics normalize and the running buffers are updated in
/// place (momentum-weighted, unbiased variance); in eval mode the running
/// buffers normalize.
template <typename T>
VarPtr<T> batch_norm(const VarPtr<T>& x, const VarPtr<T>& gamma, const VarPtr<T>& beta,
                     Tensor<T>& running_mean, Tensor<T>& running_var, bool training,
                     T momentum = T(0.1), T eps = T(1e-5));

template <typename T>
VarPtr<T> sum_all(const VarPtr<T>& x);

template <typename T>
VarPtr<T> scale(const VarPtr<T>& x, T s);

/// Mean per-pixel cross-entropy over pixels whose label differs from
/// `ignore_id`. When every pixel is ignored the loss is defined as zero
/// and `scored_pixels` reports 0.
template <typename T>
struct CeLoss {
    VarPtr<T> value;
    std::int64_t scored_pixels = 0;
};

template <typename T>
CeLoss<T> cross_entropy(const VarPtr<T>& logits, const Tensor<std::int32_t>& labels,
                        int ignore_id);

/// Per-pixel argmax over the class axis; ties resolve to the lowest id.
template <typename T>
Tensor<std::uint8_t> argmax_channels(const Tensor<T>& logits);

} // namespace palseg::nn
