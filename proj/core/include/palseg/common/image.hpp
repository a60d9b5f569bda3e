#pragma once

#include <cstdint>
#include <vector>

#include "palseg/common/check.hpp"

namespace palseg {

/// Interleaved 8-bit image, row-major, 1 (gray) or 3 (RGB) channels.
struct ImageU8 {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> data;

    ImageU8() = default;
    ImageU8(int w, int h, int c, std::uint8_t fill = 0)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * h * c, fill) {
        PALSEG_CHECK(w >= 1 && h >= 1, "image dimensions must be positive, got ", w, "x", h);
        PALSEG_CHECK(c == 1 || c == 3, "channel count must be 1 or 3, got ", c);
    }

    std::uint8_t& at(int y, int x, int c = 0) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int y, int x, int c = 0) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    bool same_shape(const ImageU8& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

} // namespace palseg
