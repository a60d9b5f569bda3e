#include "palseg/data/augment.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "palseg/common/check.hpp"

namespace palseg::data {

void AugmentConfig::validate() const {
    PALSEG_CHECK(crop_h >= 1 && crop_w >= 1, "crop size must be positive, got ", crop_h,
                 "x", crop_w);
    PALSEG_CHECK(scale_min > 0.0 && scale_max >= scale_min,
                 "degenerate scale range [", scale_min, ", ", scale_max, "]");
    PALSEG_CHECK(ignore_id >= 0 && ignore_id <= 255, "ignore_id must fit a byte");
}

namespace {

nn::Tensor<float> resize_bilinear_chw(const nn::Tensor<float>& src, int out_h, int out_w) {
    const int C = static_cast<int>(src.dim(0));
    const int H = static_cast<int>(src.dim(1));
    const int W = static_cast<int>(src.dim(2));
    nn::Tensor<float> dst({C, out_h, out_w});
    const double sy = static_cast<double>(H) / out_h;
    const double sx = static_cast<double>(W) / out_w;
    for (int c = 0; c < C; ++c) {
        const float* sp = src.data() + static_cast<std::int64_t>(c) * H * W;
        float* dp = dst.data() + static_cast<std::int64_t>(c) * out_h * out_w;
        for (int y = 0; y < out_h; ++y) {
            const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(H - 1));
            const int y0 = static_cast<int>(fy);
            const int y1 = std::min(y0 + 1, H - 1);
            const double wy = fy - y0;
            for (int x = 0; x < out_w; ++x) {
                const double fx =
                    std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(W - 1));
                const int x0 = static_cast<int>(fx);
                const int x1 = std::min(x0 + 1, W - 1);
                const double wx = fx - x0;
                const double top = sp[y0 * W + x0] + (sp[y0 * W + x1] - sp[y0 * W + x0]) * wx;
                const double bot = sp[y1 * W + x0] + (sp[y1 * W + x1] - sp[y1 * W + x0]) * wx;
                dp[static_cast<std::int64_t>(y) * out_w + x] =
                    static_cast<float>(top + (bot - top) * wy);
            }
        }
    }
    return dst;
}

int nearest_index(int dst, int in_size, int out_size) {
    const double f = (dst + 0.5) * static_cast<double>(in_size) / out_size - 0.5;
    return std::clamp(static_cast<int>(std::lround(f)), 0, in_size - 1);
}

nn::Tensor<std::uint8_t> resize_nearest_u8(const nn::Tensor<std::uint8_t>& src, int out_h,
                                           int out_w) {
    const int H = static_cast<int>(src.dim(0));
    const int W = static_cast<int>(src.dim(1));
    nn::Tensor<std::uint8_t> dst({out_h, out_w});
    for (int y = 0; y < out_h; ++y) {
        const int sy = nearest_index(y, H, out_h);
        for (int x = 0; x < out_w; ++x) {
            dst[static_cast<std::int64_t>(y) * out_w + x] =
                src[static_cast<std::int64_t>(sy) * W + nearest_index(x, W, out_w)];
        }
    }
    return dst;
}

/// Reads the (flip, crop)-transformed pixel or the pad value.
template <typename Get>
void assemble_u8(nn::Tensor<std::uint8_t>& out, const AugmentRecord& rec, int crop_h,
                 int crop_w, std::uint8_t pad, Get get) {
    for (int y = 0; y < crop_h; ++y) {
        const int sy = rec.crop_y + y;
        for (int x = 0; x < crop_w; ++x) {
            int sx = rec.crop_x + x;
            std::uint8_t v = pad;
            if (sy >= 0 && sy < rec.scaled_h && sx >= 0 && sx < rec.scaled_w) {
                if (rec.flipped) sx = rec.scaled_w - 1 - sx;
                v = get(sy, sx);
            }
            out[static_cast<std::int64_t>(y) * crop_w + x] = v;
        }
    }
}

} // namespace

SegSample augment(const SegSample& sample, std::uint64_t seed, const AugmentConfig& cfg,
                  AugmentRecord* record) {
    cfg.validate();
    PALSEG_CHECK(sample.image.ndim() == 3 && sample.label.ndim() == 2,
                 "augment: malformed sample '", sample.id, "'");

    std::mt19937_64 rng(seed);
    AugmentRecord rec;
    rec.scale = std::uniform_real_distribution<double>(cfg.scale_min, cfg.scale_max)(rng);
    rec.flipped = cfg.hflip && std::bernoulli_distribution(0.5)(rng);

    const int H = sample.height(), W = sample.width();
    rec.scaled_h = std::max(1, static_cast<int>(std::lround(H * rec.scale)));
    rec.scaled_w = std::max(1, static_cast<int>(std::lround(W * rec.scale)));
    rec.crop_y = std::uniform_int_distribution<int>(0, std::max(0, rec.scaled_h - cfg.crop_h))(rng);
    rec.crop_x = std::uniform_int_distribution<int>(0, std::max(0, rec.scaled_w - cfg.crop_w))(rng);

    const nn::Tensor<float> scaled_img =
        resize_bilinear_chw(sample.image, rec.scaled_h, rec.scaled_w);
    const nn::Tensor<std::uint8_t> scaled_lbl =
        resize_nearest_u8(sample.label, rec.scaled_h, rec.scaled_w);
    nn::Tensor<std::uint8_t> scaled_mask;
    if (sample.has_mask()) {
        scaled_mask = resize_nearest_u8(sample.valid_mask, rec.scaled_h, rec.scaled_w);
    }

    SegSample out;
    out.id = sample.id;
    out.image = nn::Tensor<float>({3, cfg.crop_h, cfg.crop_w}, 0.0f);
    const std::int64_t shw = static_cast<std::int64_t>(rec.scaled_h) * rec.scaled_w;
    const std::int64_t ohw = static_cast<std::int64_t>(cfg.crop_h) * cfg.crop_w;
    for (int c = 0; c < 3; ++c) {
        const float* sp = scaled_img.data() + c * shw;
        float* dp = out.image.data() + c * ohw;
        for (int y = 0; y < cfg.crop_h; ++y) {
            const int sy = rec.crop_y + y;
            if (sy < 0 || sy >= rec.scaled_h) continue;
            for (int x = 0; x < cfg.crop_w; ++x) {
                int sx = rec.crop_x + x;
                if (sx < 0 || sx >= rec.scaled_w) continue;
                if (rec.flipped) sx = rec.scaled_w - 1 - sx;
                dp[static_cast<std::int64_t>(y) * cfg.crop_w + x] =
                    sp[static_cast<std::int64_t>(sy) * rec.scaled_w + sx];
            }
        }
    }

    out.label = nn::Tensor<std::uint8_t>({cfg.crop_h, cfg.crop_w});
    assemble_u8(out.label, rec, cfg.crop_h, cfg.crop_w,
                static_cast<std::uint8_t>(cfg.ignore_id), [&](int y, int x) {
                    return scaled_lbl[static_cast<std::int64_t>(y) * rec.scaled_w + x];
                });
    if (sample.has_mask()) {
        out.valid_mask = nn::Tensor<std::uint8_t>({cfg.crop_h, cfg.crop_w});
        assemble_u8(out.valid_mask, rec, cfg.crop_h, cfg.crop_w, 0, [&](int y, int x) {
            return scaled_mask[static_cast<std::int64_t>(y) * rec.scaled_w + x];
        });
    }

    if (record) *record = rec;
    return out;
}

nn::Tensor<std::uint8_t> apply_record_to_label(const nn::Tensor<std::uint8_t>& label,
                                               const AugmentRecord& record,
                                               const AugmentConfig& cfg) {
    const nn::Tensor<std::uint8_t> scaled =
        resize_nearest_u8(label, record.scaled_h, record.scaled_w);
    nn::Tensor<std::uint8_t> out({cfg.crop_h, cfg.crop_w});
    assemble_u8(out, record, cfg.crop_h, cfg.crop_w, static_cast<std::uint8_t>(cfg.ignore_id),
                [&](int y, int x) {
                    return scaled[static_cast<std::int64_t>(y) * record.scaled_w + x];
                });
    return out;
}

} // namespace palseg::data
