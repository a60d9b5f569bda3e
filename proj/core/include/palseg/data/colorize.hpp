#pragma once

#include "palseg/common/image.hpp"
#include "palseg/data/catalog.hpp"
#include "palseg/nn/tensor.hpp"

namespace palseg::data {

/// Renders a label mask through the catalog palette; ignore pixels get
/// the catalog's ignore color.
ImageU8 colorize(const nn::Tensor<std::uint8_t>& label, const ClassCatalog& catalog);

/// Inverse of colorize. A color absent from the palette raises an error
/// naming the offending pixel.
nn::Tensor<std::uint8_t> decode_color(const ImageU8& image, const ClassCatalog& catalog);

/// Colorized label alpha-blended over the input image.
ImageU8 overlay(const ImageU8& base, const nn::Tensor<std::uint8_t>& label,
                const ClassCatalog& catalog, double alpha = 0.5);

} // namespace palseg::data
