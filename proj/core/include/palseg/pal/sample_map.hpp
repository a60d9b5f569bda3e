#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "palseg/pal/calibration.hpp"

namespace palseg::pal {

/// Precomputed per-output-pixel source coordinates for unfolding, plus a
/// validity mask. Output pixel (row, col) samples the raw image at
/// (src_x, src_y); `valid` is false where the source falls outside the
/// raw image bounds or outside the [r_inner, r_outer] ring.
struct SampleMap {
    int width = 0;       // unfolded width
    int height = 0;      // unfolded height
    int raw_width = 0;
    int raw_height = 0;
    bool flipped_rows = false;
    std::vector<double> src_x;         // height*width
    std::vector<double> src_y;         // height*width
    std::vector<std::uint8_t> valid;   // height*width, 0 or 1

    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * width + col;
    }
    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * height;
    }
};

/// Builds the sampling map at output pixel centers (row + 0.5, col + 0.5).
/// Row 0 corresponds to r_inner unless `flip_rows` is set.
/// Hard error when the calibration center lies outside the raw image or
/// when no output pixel has a valid source (annulus entirely off-sensor).
SampleMap build_sample_map(const PalCalibration& calib, int out_w, int out_h,
                           int raw_w, int raw_h, bool flip_rows = false);

/// Cache I/O: flat binary payload with a JSON header carrying the
/// dimensions and the calibration checksum.
void save_sample_map(const std::string& path, const SampleMap& map,
                     const PalCalibration& calib);

/// Fails if the cached map was built for a different calibration.
SampleMap load_sample_map(const std::string& path, const PalCalibration& calib);

} // namespace palseg::pal
