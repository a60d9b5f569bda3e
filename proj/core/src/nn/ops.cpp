#include "palseg/nn/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <vector>

namespace palseg::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

int conv_out_dim(int in, int k, int s, int p) {
    // Floor division: the numerator may go negative for undersized inputs.
    const int num = in + 2 * p - k;
    const int q = num >= 0 ? num / s : -((-num + s - 1) / s);
    return q + 1;
}

template <typename T>
void im2col(const T* x, int C, int H, int W, int kh, int kw, int sh, int sw,
            int ph, int pw, int OH, int OW, T* col) {
    const std::int64_t plane = static_cast<std::int64_t>(OH) * OW;
#pragma omp parallel for schedule(static)
    for (int c = 0; c < C; ++c) {
        for (int ky = 0; ky < kh; ++ky) {
            for (int kx = 0; kx < kw; ++kx) {
                T* dst = col + (static_cast<std::int64_t>(c) * kh * kw + ky * kw + kx) * plane;
                for (int oy = 0; oy < OH; ++oy) {
                    const int y = oy * sh + ky - ph;
                    T* row = dst + static_cast<std::int64_t>(oy) * OW;
                    if (y < 0 || y >= H) {
                        std::fill(row, row + OW, T(0));
                        continue;
                    }
                    const T* src = x + (static_cast<std::int64_t>(c) * H + y) * W;
                    for (int ox = 0; ox < OW; ++ox) {
                        const int xx = ox * sw + kx - pw;
                        row[ox] = (xx >= 0 && xx < W) ? src[xx] : T(0);
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im_accumulate(const T* col, int C, int H, int W, int kh, int kw, int sh, int sw,
                       int ph, int pw, int OH, int OW, T* x) {
    const std::int64_t plane = static_cast<std::int64_t>(OH) * OW;
#pragma omp parallel for schedule(static)
    for (int c = 0; c < C; ++c) {
        for (int ky = 0; ky < kh; ++ky) {
            for (int kx = 0; kx < kw; ++kx) {
                const T* src = col + (static_cast<std::int64_t>(c) * kh * kw + ky * kw + kx) * plane;
                for (int oy = 0; oy < OH; ++oy) {
                    const int y = oy * sh + ky - ph;
                    if (y < 0 || y >= H) continue;
                    T* dst = x + (static_cast<std::int64_t>(c) * H + y) * W;
                    const T* row = src + static_cast<std::int64_t>(oy) * OW;
                    for (int ox = 0; ox < OW; ++ox) {
                        const int xx = ox * sw + kx - pw;
                        if (xx >= 0 && xx < W) dst[xx] += row[ox];
                    }
                }
            }
        }
    }
}

} // namespace

template <typename T>
VarPtr<T> conv2d(const VarPtr<T>& x, const VarPtr<T>& w, const VarPtr<T>& b,
                 int stride_h, int stride_w, int pad_h, int pad_w) {
    PALSEG_CHECK(x && w, "conv2d: null input");
    PALSEG_CHECK(x->value.ndim() == 4, "conv2d: input must be NCHW, got ",
                 x->value.shape_str());
    PALSEG_CHECK(w->value.ndim() == 4, "conv2d: weight must be [out,in,kh,kw], got ",
                 w->value.shape_str());
    PALSEG_CHECK(stride_h >= 1 && stride_w >= 1, "conv2d: stride must be >= 1");
    PALSEG_CHECK(pad_h >= 0 && pad_w >= 0, "conv2d: padding must be >= 0");

    const auto& xs = x->value.shape();
    const auto& ws = w->value.shape();
    const int N = static_cast<int>(xs[0]), C = static_cast<int>(xs[1]);
    const int H = static_cast<int>(xs[2]), W = static_cast<int>(xs[3]);
    const int OC = static_cast<int>(ws[0]), kh = static_cast<int>(ws[2]),
              kw = static_cast<int>(ws[3]);
    PALSEG_CHECK(ws[1] == C, "conv2d: channel mismatch, input has ", C,
                 " channels but weight expects ", ws[1]);
    if (b) {
        PALSEG_CHECK(b->value.numel() == OC, "conv2d: bias size ", b->value.numel(),
                     " does not match ", OC, " output channels");
    }

    const int OH = conv_out_dim(H, kh, stride_h, pad_h);
    const int OW = conv_out_dim(W, kw, stride_w, pad_w);
    PALSEG_CHECK(OH >= 1 && OW >= 1, "conv2d: output dims ", OH, "x", OW,
                 " collapse below 1 for input ", H, "x", W, " kernel ", kh, "x", kw);

    const std::int64_t ckk = static_cast<std::int64_t>(C) * kh * kw;
    const std::int64_t ohw = static_cast<std::int64_t>(OH) * OW;

    Tensor<T> out({N, OC, OH, OW});
    std::vector<T> col(static_cast<std::size_t>(ckk * ohw));
    ConstMatMap<T> wmat(w->value.data(), OC, ckk);
    for (int n = 0; n < N; ++n) {
        const T* xn = x->value.data() + static_cast<std::int64_t>(n) * C * H * W;
        im2col(xn, C, H, W, kh, kw, stride_h, stride_w, pad_h, pad_w, OH, OW, col.data());
        ConstMatMap<T> cmat(col.data(), ckk, ohw);
        MatMap<T> omat(out.data() + static_cast<std::int64_t>(n) * OC * ohw, OC, ohw);
        omat.noalias() = wmat * cmat;
        if (b) {
            for (int oc = 0; oc < OC; ++oc) {
                omat.row(oc).array() += b->value[oc];
            }
        }
    }

    VarPtr<T> result = make_var(std::move(out));
    if (recording<T>({&x, &w, &b})) {
        result->requires_grad = true;
        result->parents = b ? std::vector<VarPtr<T>>{x, w, b} : std::vector<VarPtr<T>>{x, w};
        result->backward_fn = [x, w, b, stride_h, stride_w, pad_h, pad_w, N, C, H, W, OC, kh,
                               kw, OH, OW, ckk, ohw](VarNode<T>& self) {
            const bool need_dx = x->requires_grad || x->backward_fn != nullptr;
            std::vector<T> col(static_cast<std::size_t>(ckk * ohw));
            std::vector<T> dcol(need_dx ? static_cast<std::size_t>(ckk * ohw) : 0);
            ConstMatMap<T> wmat(w->value.data(), OC, ckk);
            MatMap<T> dwmat(w->grad_buffer().data(), OC, ckk);
            Tensor<T>* dx = need_dx ? &x->grad_buffer() : nullptr;
            for (int n = 0; n < N; ++n) {
                ConstMatMap<T> dymat(self.grad.data() + static_cast<std::int64_t>(n) * OC * ohw,
                                     OC, ohw);
                const T* xn = x->value.data() + static_cast<std::int64_t>(n) * C * H * W;
                im2col(xn, C, H, W, kh, kw, stride_h, stride_w, pad_h, pad_w, OH, OW,
                       col.data());
                ConstMatMap<T> cmat(col.data(), ckk, ohw);
                dwmat.noalias() += dymat * cmat.transpose();
                if (need_dx) {
                    MatMap<T> dcmat(dcol.data(), ckk, ohw);
                    dcmat.noalias() = wmat.transpose() * dymat;
                    col2im_accumulate(dcol.data(), C, H, W, kh, kw, stride_h, stride_w, pad_h,
                                      pad_w, OH, OW,
                                      dx->data() + static_cast<std::int64_t>(n) * C * H * W);
                }
                if (b) {
                    T* db = b->grad_buffer().data();
                    for (int oc = 0; oc < OC; ++oc) {
                        db[oc] += dymat.row(oc).sum();
                    }
                }
            }
        };
    }
    return result;
}

template <typename T>
VarPtr<T> separable_blend(const VarPtr<T>& x, const VarPtr<T>& w31, const VarPtr<T>& w13,
                          const VarPtr<T>& b31, const VarPtr<T>& b13) {
    PALSEG_CHECK(w31 && w31->value.ndim() == 4 && w31->value.dim(2) == 3 &&
                     w31->value.dim(3) == 1,
                 "separable_blend: w31 must be [out,in,3,1]");
    PALSEG_CHECK(w13 && w13->value.ndim() == 4 && w13->value.dim(2) == 1 &&
                     w13->value.dim(3) == 3,
                 "separable_blend: w13 must be [out,in,1,3]");
    VarPtr<T> t = conv2d(x, w31, b31, 1, 1, 1, 0);
    return conv2d(t, w13, b13, 1, 1, 0, 1);
}

template <typename T>
VarPtr<T> avg_pool2d(const VarPtr<T>& x, int kernel, int stride, int padding,
                     bool exclude_pad) {
    PALSEG_CHECK(x && x->value.ndim() == 4, "avg_pool2d: input must be NCHW");
    PALSEG_CHECK(kernel >= stride && stride >= 1,
                 "avg_pool2d: requires kernel >= stride >= 1, got kernel=", kernel,
                 " stride=", stride);
    PALSEG_CHECK(padding >= 0 && padding <= kernel / 2,
                 "avg_pool2d: padding must be in [0, kernel/2], got ", padding);

    const auto& xs = x->value.shape();
    const int N = static_cast<int>(xs[0]), C = static_cast<int>(xs[1]);
    const int H = static_cast<int>(xs[2]), W = static_cast<int>(xs[3]);
    const int OH = conv_out_dim(H, kernel, stride, padding);
    const int OW = conv_out_dim(W, kernel, stride, padding);
    PALSEG_CHECK(OH >= 1 && OW >= 1, "avg_pool2d: output dims ", OH, "x", OW,
                 " collapse below 1 (input ", H, "x", W, ", kernel ", kernel, ", stride ",
                 stride, ", padding ", padding, ")");

    Tensor<T> out({N, C, OH, OW});
    const std::int64_t slices = static_cast<std::int64_t>(N) * C;
#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < slices; ++s) {
        const T* src = x->value.data() + s * H * W;
        T* dst = out.data() + s * OH * OW;
        for (int oy = 0; oy < OH; ++oy) {
            for (int ox = 0; ox < OW; ++ox) {
                const int y0 = oy * stride - padding, x0 = ox * stride - padding;
                const int ya = std::max(y0, 0), yb = std::min(y0 + kernel, H);
                const int xa = std::max(x0, 0), xb = std::min(x0 + kernel, W);
                T acc = T(0);
                for (int y = ya; y < yb; ++y) {
                    const T* row = src + static_cast<std::int64_t>(y) * W;
                    for (int xx = xa; xx < xb; ++xx) acc += row[xx];
                }
                const int count = exclude_pad ? (yb - ya) * (xb - xa) : kernel * kernel;
                dst[oy * OW + ox] = acc / static_cast<T>(count);
            }
        }
    }

    VarPtr<T> result = make_var(std::move(out));
    if (recording<T>({&x})) {
        result->requires_grad = true;
        result->parents = {x};
        result->backward_fn = [x, kernel, stride, padding, exclude_pad, N, C, H, W, OH,
                               OW](VarNode<T>& self) {
            Tensor<T>& dx = x->grad_buffer();
            const std::int64_t slices = static_cast<std::int64_t>(N) * C;
#pragma omp parallel for schedule(static)
            for (std::int64_t s = 0; s < slices; ++s) {
                const T* dy = self.grad.data() + s * OH * OW;
                T* dst = dx.data() + s * H * W;
                for (int oy = 0; oy < OH; ++oy) {
                    for (int ox = 0; ox < OW; ++ox) {
                        const int y0 = oy * stride - padding, x0 = ox * stride - padding;
                        const int ya = std::max(y0, 0), yb = std::min(y0 + kernel, H);
                        const int xa = std::max(x0, 0), xb = std::min(x0 + kernel, W);
                        const int count = exclude_pad ? (yb - ya) * (xb - xa) : kernel * kernel;
                        const T g = dy[oy * OW + ox] / static_cast<T>(count);
                        for (int y = ya; y < yb; ++y) {
                            T* row = dst + static_cast<std::int64_t>(y) * W;
                            for (int xx = xa; xx < xb; ++xx) row[xx] += g;
                        }
                    }
                }
            }
        };
    }
    return result;
}

template <typename T>
VarPtr<T> max_pool2d(const VarPtr<T>& x, int kernel, int stride, int padding) {
    PALSEG_CHECK(x && x->value.ndim() == 4, "max_pool2d: input must be NCHW");
    const auto& xs = x->value.shape();
    const int N = static_cast<int>(xs[0]), C = static_cast<int>(xs[1]);
    const int H = static_cast<int>(xs[2]), W = static_cast<int>(xs[3]);
    const int OH = conv_out_dim(H, kernel, stride, padding);
    const int OW = conv_out_dim(W, kernel, stride, padding);
    PALSEG_CHECK(OH >= 1 && OW >= 1, "max_pool2d: output dims collapse below 1");

    Tensor<T> out({N, C, OH, OW});
    auto argmax = std::make_shared<std::vector<std::int32_t>>(
        static_cast<std::size_t>(N) * C * OH * OW);
    const std::int64_t slices = static_cast<std::int64_t>(N) * C;
#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < slices; ++s) {
        const T* src = x->value.data() + s * H * W;
        T* dst = out.data() + s * OH * OW;
        std::int32_t* amax = argmax->data() + s * OH * OW;
        for (int oy = 0; oy < OH; ++oy) {
            for (int ox = 0; ox < OW; ++ox) {
                const int y0 = oy * stride - padding, x0 = ox * stride - padding;
                const int ya = std::max(y0, 0), yb = std::min(y0 + kernel, H);
                const int xa = std::max(x0, 0), xb = std::min(x0 + kernel, W);
                T best = src[static_cast<std::int64_t>(ya) * W + xa];
                std::int32_t best_idx = ya * W + xa;
                for (int y = ya; y < yb; ++y) {
                    for (int xx = xa; xx < xb; ++xx) {
                        const T v = src[static_cast<std::int64_t>(y) * W + xx];
                        if (v > best) {
                            best = v;
                            best_idx = y * W + xx;
                        }
                    }
                }
                dst[oy * OW + ox] = best;
                amax[oy * OW + ox] = best_idx;
            }
        }
    }

    VarPtr<T> result = make_var(std::move(out));
    if (recording<T>({&x})) {
        result->requires_grad = true;
        result->parents = {x};
        result->backward_fn = [x, argmax, N, C, H, W, OH, OW](VarNode<T>& self) {
            Tensor<T>& dx = x->grad_buffer();
            const std::int64_t slices = static_cast<std::int64_t>(N) * C;
#pragma omp parallel for schedule(static)
            for (std::int64_t s = 0; s < slices; ++s) {
                const T* dy = self.grad.data() + s * OH * OW;
                const std::int32_t* amax = argmax->data() + s * OH * OW;
                T* dst = dx.data() + s * H * W;
                for (std::int64_t i = 0; i < static_cast<std::int64_t>(OH) * OW; ++i) {
                    dst[amax[i]] += dy[i];
                }
            }
        };
    }
    return result;
}

template <typename T>
VarPtr<T> global_avg_pool(const VarPtr<T>& x) {
    PALSEG_CHECK(x && x->value.ndim() == 4, "global_avg_pool: input must be NCHW");
    const auto& xs = x->value.shape();
    const int N = static_cast<int>(xs[0]), C = static_cast<int>(xs[1]);
    const std::int64_t hw = xs[2] * xs[3];

    Tensor<T> out({N, C, 1, 1});
    for (std::int64_t s = 0; s < static_cast<std::int64_t>(N) * C; ++s) {
        const T* src = x->value.data() + s * hw;
        T acc = T(0);
        for (std::int64_t i = 0; i < hw; ++i) acc += src[i];
        out[s] = acc / static_cast<T>(hw);
    }

    VarPtr<T> result = make_var(std::move(out));
    if (recording<T>({&x})) {
        result->requires_grad = true;
        result->parents = {x};
        result->backward_fn = [x, N, C, hw](VarNode<T>& self) {
            Tensor<T>& dx = x->grad_buffer();
            for (std::int64_t s = 0; s < static_cast<std::int64_t>(N) * C; ++s) {
                const T g = self.grad[s] / static_cast<T>(hw);
                T* dst = dx.data() + s * hw;
                for (std::int64_t i = 0; i < hw; ++i) dst[i] += g;
            }
        };
    }
    return result;
}

namespace {

/// Half-pixel-center source coordinate and interpolation weights for one
/// axis. Integer scale factors stay translation-consistent, and a 1-wide
/// input degenerates to a broadcast.
struct LinearTap {
    int lo, hi;
    double w_hi;
};

inline LinearTap linear_tap(int out_idx, int in_size, int out_size) {
    LinearTap t;
    if (in_size <= 1) {
        t.lo = t.hi = 0;
        t.w_hi = 0.0;
        return t;
    }
    const double scale = static_cast<double>(in_size) / out_size;
    double src = (out_idx + 0.5) * scale - 0.5;
    if (src < 0.0) src = 0.0;
    if (src > in_size - 1) src = in_size - 1;
    t.lo = static_cast<int>(src);
    if (t.lo > in_size - 2) t.lo = in_size - 2;
    t.hi = t.lo + 1;
    t.w_hi = src - t.lo;
    return t;
}

} // namespace

template <typename T>
VarPtr<T> upsample_bilinear(const VarPtr<T>& x, int out_h, int out_w) {
    PALSEG_CHECK(x && x->value.ndim() == 4, "upsample_bilinear: input must be NCHW");
    PALSEG_CHECK(out_h >= 1 && out_w >= 1, "upsample_bilinear: target dims must be >= 1");
    const auto& xs = x->value.shape();
    const int N = static_cast<int>(xs[0]), C = static_cast<int>(xs[1]);
    const int H = static_cast<int>(xs[2]), W = static_cast<int>(xs[3]);

    Tensor<T> out({N, C, out_h, out_w});
    const std::int64_t slices = static_cast<std::int64_t>(N) * C;
#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < slices; ++s) {
        const T* src = x->value.data() + s * H * W;
        T* dst = out.data() + s * static_cast<std::int64_t>(out_h) * out_w;
        for (int oy = 0; oy < out_h; ++oy) {
            const LinearTap ty = linear_tap(oy, H, out_h);
            for (int ox = 0; ox < out_w; ++ox) {
                const LinearTap tx = linear_tap(ox, W, out_w);
                const double v00 = src[static_cast<std::int64_t>(ty.lo) * W + tx.lo];
                const double v01 = src[static_cast<std::int64_t>(ty.lo) * W + tx.hi];
                const double v10 = src[static_cast<std::int64_t>(ty.hi) * W + tx.lo];
                const double v11 = src[static_cast<std::int64_t>(ty.hi) * W + tx.hi];
                const double top = v00 + (v01 - v00) * tx.w_hi;
                const double bot = v10 + (v11 - v10) * tx.w_hi;
                dst[static_cast<std::int64_t>(oy) * out_w + ox] =
                    static_cast<T>(top + (bot - top) * ty.w_hi);
            }
        }
    }

    VarPtr<T> result = make_var(std::move(out));
    if (recording<T>({&x})) {
        result->requires_grad = true;
        result->parents = {x};
        result->backward_fn = [x, N, C, H, W, out_h, out_w](VarNode<T>& self) {
            Tensor<T>& dx = x->grad_buffer();
            const std::int64_t slices = static_cast<std::int64_t>(N) * C;
#pragma omp parallel for schedule(static)
            for (std::int64_t s = 0; s < slices; ++s) {
                const T* dy = self.grad.data() + s * static_cast<std::int64_t>(out_h) * out_w;
                T* dst = dx.data() + s * H * W;
                for (int oy = 0; oy < out_h; ++oy) {
                    const LinearTap ty = linear_tap(oy, H, out_h);
                    for (int ox = 0; ox < out_w; ++ox) {
                        const LinearTap tx = linear_tap(ox, W, out_w);
                        const double g = dy[static_cast<std::int64_t>(oy) * out_w + ox];
                        dst[static_cast<std::int64_t>(ty.lo) * W + tx.lo] +=
                            static_cast<T>(g * (1 - ty.w_hi) * (1 - tx.w_hi));
                        dst[static_cast<std::int64_t>(ty.lo) * W + tx.hi] +=
                            static_cast<T>(g * (1 - ty.w_hi) * tx.w_hi);
                        dst[static_cast<std::int64_t>(ty.hi) * W + tx.lo] +=
                            static_cast<T>(g * ty.w_hi * (1 - tx.w_hi));
                        dst[static_cast<std::int64_t>(ty.hi) * W + tx.hi] +=
                            static_cast<T>(g * ty.w_hi * tx.w_hi);
                    }
                }
            }
        };
    }
    return result;
}

template <typename T>
VarPtr<T> relu(const VarPtr<T>& x) {
    PALSEG_CHECK(x, "relu: null input");
    Tensor<T> out(x->value.shape());
    const std::int64_t n = x->value.numel();
    const T* src = x->value.data();
    T* dst = out.data();
    for (std::int64_t i = 0; i < n; ++i) dst[i] = src[i] > T(0) ? src[i] : T(0);

    VarPtr<T> result = make_var(std::move(out));
    if (recording<T>({&x})) {
        result->requires_grad = true;
        result->parents = {x};
        result->backward_fn = [x, n](VarNode<T>& self) {
            T* dx = x->grad_buffer().data();
            const T* dy = self.grad.data();
            const T* v = self.value.data();
            for (std::int64_t i = 0; i < n; ++i) {
                if (v[i] > T(0)) dx[i] += dy[i];
            }
        };
    }
    return result;
}

template <typename T>
VarPtr<T> add(const VarPtr<T>& a, const VarPtr<T>& b) {
    PALSEG_CHECK(a && b, "add: null input");
    PALSEG_CHECK(a->value.same_shape(b->value), "add: shape mismatch ",
                 a->value.shape_str(), " vs ", b->value.shape_str());
    Tensor<T> out(a->value.shape());
    const std::int64_t n = out.numel();
    const T* pa = a->value.data();
    const T* pb = b->value.data();
    T* dst = out.data();
    for (std::int64_t i = 0; i < n; ++i) dst[i] = pa[i] + pb[i];

    VarPtr<T> result = make_var(std::move(out));
    if (recording<T>({&a, &b})) {
        result->requires_grad = true;
        result->parents = {a, b};
        result->backward_fn = [a, b](VarNode<T>& self) {
            accumulate(*a, self.grad);
            accumulate(*b, self.grad);
        };
    }
    return result;
}

template <typename T>
VarPtr<T> concat_channels(const std::vector<VarPtr<T>>& xs) {
    PALSEG_CHECK(!xs.empty(), "concat_channels: empty input list");
    const auto& first = xs.front()->value.shape();
    PALSEG_CHECK(first.size() == 4, "concat_channels: inputs must be NCHW");
    std::int64_t total_c = 0;
    for (const auto& v : xs) {
        PALSEG_CHECK(v && v->value.ndim() == 4, "concat_channels: null or non-4d input");
        const auto& s = v->value.shape();
        PALSEG_CHECK(s[0] == first[0] && s[2] == first[2] && s[3] == first[3],
                     "concat_channels: incompatible shapes ", v->value.shape_str(), " vs ",
                     Tensor<T>::shape_str(first));
        total_c += s[1];
    }

    const std::int64_t N = first[0], hw = first[2] * first[3];
    Tensor<T> out({N, total_c, first[2], first[3]});
    for (std::int64_t n = 0; n < N; ++n) {
        std::int64_t c_off = 0;
        for (const auto& v : xs) {
            const std::int64_t c = v->value.dim(1);
            const T* src = v->value.data() + n * c * hw;
            T* dst = out.data() + (n * total_c + c_off) * hw;
            std::copy(src, src + c * hw, dst);
            c_off += c;
        }
    }

    VarPtr<T> result = make_var(std::move(out));
    bool rec = grad_enabled();
    if (rec) {
        bool any = false;
        for (const auto& v : xs) any = any || v->requires_grad;
        rec = any;
    }
    if (rec) {
        result->requires_grad = true;
        result->parents = xs;
        result->backward_fn = [xs, N, hw, total_c](VarNode<T>& self) {
            for (std::int64_t n = 0; n < N; ++n) {
                std::int64_t c_off = 0;
                for (const auto& v : xs) {
                    const std::int64_t c = v->value.dim(1);
                    const T* src = self.grad.data() + (n * total_c + c_off) * hw;
                    T* dst = v->grad_buffer().data() + n * c * hw;
                    for (std::int64_t i = 0; i < c * hw; ++i) dst[i] += src[i];
                    c_off += c;
                }
            }
        };
    }
    return result;
}

template <typename T>
VarPtr<T> batch_norm(const VarPtr<T>& x, const VarPtr<T>& gamma, const VarPtr<T>& beta,
                     Tensor<T>& running_mean, Tensor<T>& running_var, bool training,
                     T momentum, T eps) {
    PALSEG_CHECK(x && gamma && beta, "batch_norm: null input");
    PALSEG_CHECK(x->value.ndim() == 4, "batch_norm: input must be NCHW");
    const auto& xs = x->value.shape();
    const int N = static_cast<int>(xs[0]), C = static_cast<int>(xs[1]);
    const std::int64_t hw = xs[2] * xs[3];
    const std::int64_t m = static_cast<std::int64_t>(N) * hw;
    PALSEG_CHECK(gamma->value.numel() == C && beta->value.numel() == C &&
                     running_mean.numel() == C && running_var.numel() == C,
                 "batch_norm: parameter size mismatch for ", C, " channels");

    auto mean = std::make_shared<std::vector<T>>(C);
    auto invstd = std::make_shared<std::vector<T>>(C);

    if (training) {
#pragma omp parallel for schedule(static)
        for (int c = 0; c < C; ++c) {
            double acc = 0.0;
            for (int n = 0; n < N; ++n) {
                const T* src = x->value.data() + (static_cast<std::int64_t>(n) * C + c) * hw;
                for (std::int64_t i = 0; i < hw; ++i) acc += src[i];
            }
            const double mu = acc / static_cast<double>(m);
            double var_acc = 0.0;
            for (int n = 0; n < N; ++n) {
                const T* src = x->value.data() + (static_cast<std::int64_t>(n) * C + c) * hw;
                for (std::int64_t i = 0; i < hw; ++i) {
                    const double d = src[i] - mu;
                    var_acc += d * d;
                }
            }
            const double var = var_acc / static_cast<double>(m);
            (*mean)[c] = static_cast<T>(mu);
            (*invstd)[c] = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps)));
            const double unbiased = m > 1 ? var * m / (m - 1) : var;
            running_mean[c] = (T(1) - momentum) * running_mean[c] + momentum * static_cast<T>(mu);
            running_var[c] =
                (T(1) - momentum) * running_var[c] + momentum * static_cast<T>(unbiased);
        }
    } else {
        for (int c = 0; c < C; ++c) {
            (*mean)[c] = running_mean[c];
            (*invstd)[c] = T(1) / std::sqrt(running_var[c] + eps);
        }
    }

    Tensor<T> out(x->value.shape());
#pragma omp parallel for schedule(static)
    for (int c = 0; c < C; ++c) {
        const T g = gamma->value[c], bt = beta->value[c];
        const T mu = (*mean)[c], is = (*invstd)[c];
        for (int n = 0; n < N; ++n) {
            const T* src = x->value.data() + (static_cast<std::int64_t>(n) * C + c) * hw;
            T* dst = out.data() + (static_cast<std::int64_t>(n) * C + c) * hw;
            for (std::int64_t i = 0; i < hw; ++i) {
                dst[i] = g * (src[i] - mu) * is + bt;
            }
        }
    }

    VarPtr<T> result = make_var(std::move(out));
    if (recording<T>({&x, &gamma, &beta})) {
        result->requires_grad = true;
        result->parents = {x, gamma, beta};
        result->backward_fn = [x, gamma, beta, mean, invstd, training, N, C, hw,
                               m](VarNode<T>& self) {
            const bool need_dx = x->requires_grad || x->backward_fn != nullptr;
            Tensor<T>* dx = need_dx ? &x->grad_buffer() : nullptr;
            T* dgamma = gamma->grad_buffer().data();
            T* dbeta = beta->grad_buffer().data();
#pragma omp parallel for schedule(static)
            for (int c = 0; c < C; ++c) {
                const T mu = (*mean)[c], is = (*invstd)[c], g = gamma->value[c];
                double sum_dy = 0.0, sum_dy_xhat = 0.0;
                for (int n = 0; n < N; ++n) {
                    const std::int64_t off = (static_cast<std::int64_t>(n) * C + c) * hw;
                    const T* dy = self.grad.data() + off;
                    const T* xv = x->value.data() + off;
                    for (std::int64_t i = 0; i < hw; ++i) {
                        sum_dy += dy[i];
                        sum_dy_xhat += dy[i] * ((xv[i] - mu) * is);
                    }
                }
                dgamma[c] += static_cast<T>(sum_dy_xhat);
                dbeta[c] += static_cast<T>(sum_dy);
                if (!need_dx) continue;
                if (training) {
                    const double inv_m = 1.0 / static_cast<double>(m);
                    for (int n = 0; n < N; ++n) {
                        const std::int64_t off = (static_cast<std::int64_t>(n) * C + c) * hw;
                        const T* dy = self.grad.data() + off;
                        const T* xv = x->value.data() + off;
                        T* dst = dx->data() + off;
                        for (std::int64_t i = 0; i < hw; ++i) {
                            const double xhat = (xv[i] - mu) * is;
                            dst[i] += static_cast<T>(
                                g * is * (dy[i] - inv_m * sum_dy - xhat * inv_m * sum_dy_xhat));
                        }
                    }
                } else {
                    for (int n = 0; n < N; ++n) {
                        const std::int64_t off = (static_cast<std::int64_t>(n) * C + c) * hw;
                        const T* dy = self.grad.data() + off;
                        T* dst = dx->data() + off;
                        for (std::int64_t i = 0; i < hw; ++i) {
                            dst[i] += dy[i] * g * is;
                        }
                    }
                }
            }
        };
    }
    return result;
}

template <typename T>
VarPtr<T> sum_all(const VarPtr<T>& x) {
    PALSEG_CHECK(x, "sum_all: null input");
    double acc = 0.0;
    const T* src = x->value.data();
    const std::int64_t n = x->value.numel();
    for (std::int64_t i = 0; i < n; ++i) acc += src[i];
    Tensor<T> out({1});
    out[0] = static_cast<T>(acc);

    VarPtr<T> result = make_var(std::move(out));
    if (recording<T>({&x})) {
        result->requires_grad = true;
        result->parents = {x};
        result->backward_fn = [x, n](VarNode<T>& self) {
            const T g = self.grad[0];
            T* dx = x->grad_buffer().data();
            for (std::int64_t i = 0; i < n; ++i) dx[i] += g;
        };
    }
    return result;
}

template <typename T>
VarPtr<T> scale(const VarPtr<T>& x, T s) {
    PALSEG_CHECK(x, "scale: null input");
    Tensor<T> out(x->value.shape());
    const std::int64_t n = out.numel();
    for (std::int64_t i = 0; i < n; ++i) out[i] = x->value[i] * s;

    VarPtr<T> result = make_var(std::move(out));
    if (recording<T>({&x})) {
        result->requires_grad = true;
        result->parents = {x};
        result->backward_fn = [x, s, n](VarNode<T>& self) {
            T* dx = x->grad_buffer().data();
            const T* dy = self.grad.data();
            for (std::int64_t i = 0; i < n; ++i) dx[i] += dy[i] * s;
        };
    }
    return result;
}

template <typename T>
CeLoss<T> cross_entropy(const VarPtr<T>& logits, const Tensor<std::int32_t>& labels,
                        int ignore_id) {
    PALSEG_CHECK(logits && logits->value.ndim() == 4, "cross_entropy: logits must be NKHW");
    const auto& ls = logits->value.shape();
    const int N = static_cast<int>(ls[0]), K = static_cast<int>(ls[1]);
    const std::int64_t hw = ls[2] * ls[3];
    PALSEG_CHECK(labels.ndim() == 3 && labels.dim(0) == N && labels.dim(1) == ls[2] &&
                     labels.dim(2) == ls[3],
                 "cross_entropy: label shape ", labels.shape_str(),
                 " does not match logits ", logits->value.shape_str());

    auto probs = std::make_shared<Tensor<T>>(logits->value.shape());
    double total = 0.0;
    std::int64_t scored = 0;
    for (int n = 0; n < N; ++n) {
        for (std::int64_t i = 0; i < hw; ++i) {
            const std::int32_t label = labels[n * hw + i];
            const T* z = logits->value.data() + (static_cast<std::int64_t>(n) * K) * hw + i;
            double zmax = -std::numeric_limits<double>::infinity();
            for (int k = 0; k < K; ++k) zmax = std::max(zmax, static_cast<double>(z[k * hw]));
            double denom = 0.0;
            for (int k = 0; k < K; ++k) denom += std::exp(static_cast<double>(z[k * hw]) - zmax);
            const double lse = std::log(denom) + zmax;
            T* p = probs->data() + (static_cast<std::int64_t>(n) * K) * hw + i;
            for (int k = 0; k < K; ++k) {
                p[k * hw] = static_cast<T>(std::exp(static_cast<double>(z[k * hw]) - lse));
            }
            if (label == ignore_id) continue;
            PALSEG_CHECK(label >= 0 && label < K, "cross_entropy: label ", label,
                         " out of range [0, ", K, ") and not the ignore id ", ignore_id);
            total += lse - static_cast<double>(z[label * hw]);
            ++scored;
        }
    }

    Tensor<T> out({1});
    out[0] = scored > 0 ? static_cast<T>(total / static_cast<double>(scored)) : T(0);

    CeLoss<T> loss;
    loss.scored_pixels = scored;
    loss.value = make_var(std::move(out));
    if (recording<T>({&logits})) {
        loss.value->requires_grad = true;
        loss.value->parents = {logits};
        auto labels_copy = std::make_shared<Tensor<std::int32_t>>(labels);
        loss.value->backward_fn = [logits, probs, labels_copy, ignore_id, N, K, hw,
                                   scored](VarNode<T>& self) {
            if (scored == 0) return;
            const T g = self.grad[0] / static_cast<T>(scored);
            Tensor<T>& dx = logits->grad_buffer();
            for (int n = 0; n < N; ++n) {
                for (std::int64_t i = 0; i < hw; ++i) {
                    const std::int32_t label = (*labels_copy)[n * hw + i];
                    if (label == ignore_id) continue;
                    const T* p = probs->data() + (static_cast<std::int64_t>(n) * K) * hw + i;
                    T* d = dx.data() + (static_cast<std::int64_t>(n) * K) * hw + i;
                    for (int k = 0; k < K; ++k) {
                        const T onehot = (k == label) ? T(1) : T(0);
                        d[k * hw] += g * (p[k * hw] - onehot);
                    }
                }
            }
        };
    }
    return loss;
}

template <typename T>
Tensor<std::uint8_t> argmax_channels(const Tensor<T>& logits) {
    PALSEG_CHECK(logits.ndim() == 4, "argmax_channels: logits must be NKHW");
    const auto& s = logits.shape();
    const int N = static_cast<int>(s[0]), K = static_cast<int>(s[1]);
    const std::int64_t hw = s[2] * s[3];
    PALSEG_CHECK(K >= 1 && K <= 255, "argmax_channels: class axis must fit a byte");

    Tensor<std::uint8_t> out({s[0], s[2], s[3]});
    for (int n = 0; n < N; ++n) {
        const T* base = logits.data() + static_cast<std::int64_t>(n) * K * hw;
        for (std::int64_t i = 0; i < hw; ++i) {
            int best = 0;
            T best_v = base[i];
            for (int k = 1; k < K; ++k) {
                const T v = base[k * hw + i];
                if (v > best_v) {
                    best_v = v;
                    best = k;
                }
            }
            out[n * hw + i] = static_cast<std::uint8_t>(best);
        }
    }
    return out;
}

#define PALSEG_INSTANTIATE_OPS(T)                                                          \
    template VarPtr<T> conv2d<T>(const VarPtr<T>&, const VarPtr<T>&, const VarPtr<T>&,     \
                                 int, int, int, int);                                      \
    template VarPtr<T> separable_blend<T>(const VarPtr<T>&, const VarPtr<T>&,              \
                                          const VarPtr<T>&, const VarPtr<T>&,              \
                                          const VarPtr<T>&);                               \
    template VarPtr<T> avg_pool2d<T>(const VarPtr<T>&, int, int, int, bool);               \
    template VarPtr<T> max_pool2d<T>(const VarPtr<T>&, int, int, int);                     \
    template VarPtr<T> global_avg_pool<T>(const VarPtr<T>&);                               \
    template VarPtr<T> upsample_bilinear<T>(const VarPtr<T>&, int, int);                   \
    template VarPtr<T> relu<T>(const VarPtr<T>&);                                          \
    template VarPtr<T> add<T>(const VarPtr<T>&, const VarPtr<T>&);                         \
    template VarPtr<T> concat_channels<T>(const std::vector<VarPtr<T>>&);                  \
    template VarPtr<T> batch_norm<T>(const VarPtr<T>&, const VarPtr<T>&, const VarPtr<T>&, \
                                     Tensor<T>&, Tensor<T>&, bool, T, T);                  \
    template VarPtr<T> sum_all<T>(const VarPtr<T>&);                                       \
    template VarPtr<T> scale<T>(const VarPtr<T>&, T);                                      \
    template CeLoss<T> cross_entropy<T>(const VarPtr<T>&, const Tensor<std::int32_t>&,     \
                                        int);                                              \
    template Tensor<std::uint8_t> argmax_channels<T>(const Tensor<T>&);

PALSEG_INSTANTIATE_OPS(float)
PALSEG_INSTANTIATE_OPS(double)

#undef PALSEG_INSTANTIATE_OPS

} // namespace palseg::nn
