#pragma once

#include "palseg/nn/tensor.hpp"

namespace palseg::testsupport {

/// Direct (quadruple-loop) 2-D cross-correlation; the independent oracle
/// the GEMM-backed convolution is checked against.
template <typename T>
nn::Tensor<T> conv2d_oracle(const nn::Tensor<T>& x, const nn::Tensor<T>& w,
                            const std::vector<T>& bias, int stride_h, int stride_w,
                            int pad_h, int pad_w) {
    const std::int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const std::int64_t OC = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    const std::int64_t OH = (H + 2 * pad_h - kh) / stride_h + 1;
    const std::int64_t OW = (W + 2 * pad_w - kw) / stride_w + 1;

    nn::Tensor<T> out({N, OC, OH, OW});
    for (std::int64_t n = 0; n < N; ++n) {
        for (std::int64_t oc = 0; oc < OC; ++oc) {
            for (std::int64_t oy = 0; oy < OH; ++oy) {
                for (std::int64_t ox = 0; ox < OW; ++ox) {
                    double acc = bias.empty() ? 0.0 : static_cast<double>(bias[oc]);
                    for (std::int64_t c = 0; c < C; ++c) {
                        for (std::int64_t ky = 0; ky < kh; ++ky) {
                            const std::int64_t y = oy * stride_h + ky - pad_h;
                            if (y < 0 || y >= H) continue;
                            for (std::int64_t kx = 0; kx < kw; ++kx) {
                                const std::int64_t xx = ox * stride_w + kx - pad_w;
                                if (xx < 0 || xx >= W) continue;
                                acc += static_cast<double>(x.at4(n, c, y, xx)) *
                                       static_cast<double>(w.at4(oc, c, ky, kx));
                            }
                        }
                    }
                    out.at4(n, oc, oy, ox) = static_cast<T>(acc);
                }
            }
        }
    }
    return out;
}

/// Windowed-mean oracle for square average pooling with optional
/// exclude-pad counting.
template <typename T>
nn::Tensor<T> avg_pool_oracle(const nn::Tensor<T>& x, int kernel, int stride, int padding,
                              bool exclude_pad) {
    const std::int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const std::int64_t OH = (H + 2 * padding - kernel) / stride + 1;
    const std::int64_t OW = (W + 2 * padding - kernel) / stride + 1;
    nn::Tensor<T> out({N, C, OH, OW});
    for (std::int64_t n = 0; n < N; ++n) {
        for (std::int64_t c = 0; c < C; ++c) {
            for (std::int64_t oy = 0; oy < OH; ++oy) {
                for (std::int64_t ox = 0; ox < OW; ++ox) {
                    double acc = 0.0;
                    int count = 0;
                    for (int ky = 0; ky < kernel; ++ky) {
                        for (int kx = 0; kx < kernel; ++kx) {
                            const std::int64_t y = oy * stride + ky - padding;
                            const std::int64_t xx = ox * stride + kx - padding;
                            if (y < 0 || y >= H || xx < 0 || xx >= W) continue;
                            acc += static_cast<double>(x.at4(n, c, y, xx));
                            ++count;
                        }
                    }
                    const int denom = exclude_pad ? count : kernel * kernel;
                    out.at4(n, c, oy, ox) = static_cast<T>(acc / denom);
                }
            }
        }
    }
    return out;
}

template <typename T>
double max_abs_diff(const nn::Tensor<T>& a, const nn::Tensor<T>& b) {
    double worst = 0.0;
    for (std::int64_t i = 0; i < a.numel(); ++i) {
        worst = std::max(worst, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
    }
    return worst;
}

} // namespace palseg::testsupport
