#include "palseg/data/colorize.hpp"

#include <cmath>
#include <map>

namespace palseg::data {

ImageU8 colorize(const nn::Tensor<std::uint8_t>& label, const ClassCatalog& catalog) {
    catalog.validate();
    PALSEG_CHECK(label.ndim() == 2, "colorize expects an [H,W] mask, got ",
                 label.shape_str());
    const int h = static_cast<int>(label.dim(0)), w = static_cast<int>(label.dim(1));
    ImageU8 img(w, h, 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int v = label[static_cast<std::int64_t>(y) * w + x];
            const auto& color =
                v == catalog.ignore_id ? catalog.ignore_color : catalog.entry(v).color;
            for (int c = 0; c < 3; ++c) img.at(y, x, c) = color[static_cast<std::size_t>(c)];
        }
    }
    return img;
}

nn::Tensor<std::uint8_t> decode_color(const ImageU8& image, const ClassCatalog& catalog) {
    catalog.validate();
    PALSEG_CHECK(image.channels == 3, "decode_color expects an RGB image");
    std::map<std::array<std::uint8_t, 3>, int> lut;
    for (const auto& e : catalog.entries) lut[e.color] = e.id;
    lut[catalog.ignore_color] = catalog.ignore_id;

    nn::Tensor<std::uint8_t> label({image.height, image.width});
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const std::array<std::uint8_t, 3> color{image.at(y, x, 0), image.at(y, x, 1),
                                                    image.at(y, x, 2)};
            const auto it = lut.find(color);
            PALSEG_CHECK(it != lut.end(), "unknown color (", int(color[0]), ", ",
                         int(color[1]), ", ", int(color[2]), ") at pixel (", x, ", ", y,
                         ") is not in the class catalog");
            label[static_cast<std::int64_t>(y) * image.width + x] =
                static_cast<std::uint8_t>(it->second);
        }
    }
    return label;
}

ImageU8 overlay(const ImageU8& base, const nn::Tensor<std::uint8_t>& label,
                const ClassCatalog& catalog, double alpha) {
    PALSEG_CHECK(base.width == label.dim(1) && base.height == label.dim(0),
                 "overlay: image and label sizes differ");
    const ImageU8 colored = colorize(label, catalog);
    ImageU8 out(base.width, base.height, 3);
    for (int y = 0; y < base.height; ++y) {
        for (int x = 0; x < base.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                const double b = base.channels == 3 ? base.at(y, x, c) : base.at(y, x, 0);
                const double o = colored.at(y, x, c);
                out.at(y, x, c) =
                    static_cast<std::uint8_t>(std::lround((1.0 - alpha) * b + alpha * o));
            }
        }
    }
    return out;
}

} // namespace palseg::data
