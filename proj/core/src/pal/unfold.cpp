#include "palseg/pal/unfold.hpp"

#include <algorithm>
#include <cmath>

#include "palseg/common/check.hpp"

namespace palseg::pal {

UnfoldedImage unfold_image(const AnnularImage& annular, const SampleMap& map,
                           Interp interp, std::uint8_t fill) {
    const ImageU8& src = annular.image;
    PALSEG_CHECK(src.width == map.raw_width && src.height == map.raw_height,
                 "image is ", src.width, "x", src.height,
                 " but the sample map was built for ", map.raw_width, "x", map.raw_height);

    UnfoldedImage out;
    out.image = ImageU8(map.width, map.height, src.channels, fill);
    ImageU8& dst = out.image;

    const int cmax_x = src.width - 1;
    const int cmax_y = src.height - 1;

#pragma omp parallel for schedule(static)
    for (int row = 0; row < map.height; ++row) {
        for (int col = 0; col < map.width; ++col) {
            const std::size_t idx = map.index(row, col);
            if (!map.valid[idx]) continue;
            const double x = map.src_x[idx];
            const double y = map.src_y[idx];

            if (interp == Interp::nearest) {
                const int xi = std::clamp(static_cast<int>(std::lround(x)), 0, cmax_x);
                const int yi = std::clamp(static_cast<int>(std::lround(y)), 0, cmax_y);
                for (int c = 0; c < src.channels; ++c) {
                    dst.at(row, col, c) = src.at(yi, xi, c);
                }
            } else {
                const double cx = std::clamp(x, 0.0, static_cast<double>(cmax_x));
                const double cy = std::clamp(y, 0.0, static_cast<double>(cmax_y));
                const int x0 = std::min(static_cast<int>(std::floor(cx)), cmax_x);
                const int y0 = std::min(static_cast<int>(std::floor(cy)), cmax_y);
                const int x1 = std::min(x0 + 1, cmax_x);
                const int y1 = std::min(y0 + 1, cmax_y);
                const double fx = cx - x0;
                const double fy = cy - y0;
                const double w00 = (1.0 - fx) * (1.0 - fy);
                const double w01 = fx * (1.0 - fy);
                const double w10 = (1.0 - fx) * fy;
                const double w11 = fx * fy;
                for (int c = 0; c < src.channels; ++c) {
                    const double v = w00 * src.at(y0, x0, c) + w01 * src.at(y0, x1, c) +
                                     w10 * src.at(y1, x0, c) + w11 * src.at(y1, x1, c);
                    dst.at(row, col, c) = static_cast<std::uint8_t>(
                        std::clamp(std::lround(v), 0L, 255L));
                }
            }
        }
    }
    return out;
}

ImageU8 validity_mask_image(const SampleMap& map) {
    ImageU8 mask(map.width, map.height, 1, 0);
    for (int row = 0; row < map.height; ++row) {
        for (int col = 0; col < map.width; ++col) {
            mask.at(row, col) = map.valid[map.index(row, col)] ? 255 : 0;
        }
    }
    return mask;
}

} // namespace palseg::pal
