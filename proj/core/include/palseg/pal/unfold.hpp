#pragma once

#include "palseg/common/image.hpp"
#include "palseg/pal/sample_map.hpp"

namespace palseg::pal {

enum class Interp { nearest, bilinear };

/// Raw annular camera frame.
struct AnnularImage {
    ImageU8 image;
};

/// Unfolded rectangular panorama.
struct UnfoldedImage {
    ImageU8 image;
};

/// Remaps the annular image through the sampling map. Invalid pixels get
/// `fill`. Bilinear taps are clamped to the image bounds at the ring edge
/// instead of extrapolating. Use nearest for integer label maps.
UnfoldedImage unfold_image(const AnnularImage& img, const SampleMap& map,
                           Interp interp = Interp::bilinear, std::uint8_t fill = 0);

/// Validity mask rendered as an 8-bit image: 255 valid, 0 blind.
ImageU8 validity_mask_image(const SampleMap& map);

} // namespace palseg::pal
