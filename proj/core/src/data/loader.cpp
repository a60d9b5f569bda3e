#include "palseg/data/loader.hpp"

#include <algorithm>
#include <cmath>

#include "palseg/common/png_io.hpp"

namespace palseg::data {

nn::Tensor<float> image_to_tensor(const ImageU8& img) {
    nn::Tensor<float> t({3, img.height, img.width});
    const std::int64_t hw = static_cast<std::int64_t>(img.height) * img.width;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const std::int64_t i = static_cast<std::int64_t>(y) * img.width + x;
            for (int c = 0; c < 3; ++c) {
                const int src_c = img.channels == 3 ? c : 0;
                t[c * hw + i] = static_cast<float>(img.at(y, x, src_c)) / 255.0f;
            }
        }
    }
    return t;
}

ImageU8 tensor_to_image(const nn::Tensor<float>& t) {
    PALSEG_CHECK(t.ndim() == 3 && t.dim(0) == 3, "tensor_to_image expects [3,H,W], got ",
                 t.shape_str());
    const int h = static_cast<int>(t.dim(1)), w = static_cast<int>(t.dim(2));
    const std::int64_t hw = static_cast<std::int64_t>(h) * w;
    ImageU8 img(w, h, 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::int64_t i = static_cast<std::int64_t>(y) * w + x;
            for (int c = 0; c < 3; ++c) {
                const float v = std::clamp(t[c * hw + i], 0.0f, 1.0f);
                img.at(y, x, c) = static_cast<std::uint8_t>(std::lround(v * 255.0f));
            }
        }
    }
    return img;
}

nn::Tensor<std::uint8_t> label_to_tensor(const ImageU8& img) {
    PALSEG_CHECK(img.channels == 1, "label images must be single-channel, got ",
                 img.channels, " channels");
    nn::Tensor<std::uint8_t> t({img.height, img.width});
    std::copy(img.data.begin(), img.data.end(), t.data());
    return t;
}

SegSample load_sample(const DatasetManifest& manifest, const ManifestEntry& entry) {
    SegSample s;
    s.id = entry.id;
    const ImageU8 img = read_png(manifest.resolve(entry.image_path));
    const ImageU8 lbl = read_png(manifest.resolve(entry.label_path));
    PALSEG_CHECK(img.width == lbl.width && img.height == lbl.height, "sample '", entry.id,
                 "': image is ", img.width, "x", img.height, " but label is ", lbl.width,
                 "x", lbl.height);
    s.image = image_to_tensor(img);
    s.label = label_to_tensor(lbl);

    if (!entry.mask_path.empty()) {
        const ImageU8 mask = read_png(manifest.resolve(entry.mask_path));
        PALSEG_CHECK(mask.width == lbl.width && mask.height == lbl.height, "sample '",
                     entry.id, "': mask size differs from the label");
        s.valid_mask = nn::Tensor<std::uint8_t>({mask.height, mask.width});
        const int ignore = manifest.catalog.ignore_id;
        for (std::int64_t i = 0; i < s.valid_mask.numel(); ++i) {
            const bool valid = mask.data[static_cast<std::size_t>(i)] != 0;
            s.valid_mask[i] = valid ? 1 : 0;
            if (!valid) s.label[i] = static_cast<std::uint8_t>(ignore);
        }
    }
    return s;
}

void make_batch(const std::vector<SegSample>& samples, const Normalization& norm,
                nn::Tensor<float>& images, nn::Tensor<std::int32_t>& labels) {
    PALSEG_CHECK(!samples.empty(), "make_batch: empty sample list");
    const int h = samples.front().height();
    const int w = samples.front().width();
    const std::int64_t n = static_cast<std::int64_t>(samples.size());

    images = nn::Tensor<float>({n, 3, h, w});
    labels = nn::Tensor<std::int32_t>({n, h, w});
    const std::int64_t hw = static_cast<std::int64_t>(h) * w;
    for (std::int64_t i = 0; i < n; ++i) {
        const SegSample& s = samples[static_cast<std::size_t>(i)];
        PALSEG_CHECK(s.height() == h && s.width() == w,
                     "make_batch: sample '", s.id, "' size differs from the batch");
        for (int c = 0; c < 3; ++c) {
            const float* src = s.image.data() + c * hw;
            float* dst = images.data() + (i * 3 + c) * hw;
            const float mean = norm.mean[static_cast<std::size_t>(c)];
            const float inv_std = 1.0f / norm.stddev[static_cast<std::size_t>(c)];
            for (std::int64_t p = 0; p < hw; ++p) dst[p] = (src[p] - mean) * inv_std;
        }
        const std::uint8_t* src = s.label.data();
        std::int32_t* dst = labels.data() + i * hw;
        for (std::int64_t p = 0; p < hw; ++p) dst[p] = src[p];
    }
}

} // namespace palseg::data
