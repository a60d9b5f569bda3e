#pragma once

#include <cstdint>
#include <string>

namespace palseg::pal {

/// Annulus geometry of a panoramic annular image: ring center, the two
/// radii bounding the ring, and the angular origin/sweep convention.
///
/// Angles are measured from the +x axis of the raw image (y pointing
/// down). A point at angle theta in the unfolded frame sits at raw angle
/// phi = theta_offset + theta, or theta_offset - theta when `clockwise`.
struct PalCalibration {
    double center_x = 0.0;   // pixels
    double center_y = 0.0;   // pixels
    double r_inner = 0.0;    // pixels
    double r_outer = 0.0;    // pixels
    double theta_offset = 0.0; // radians, in [0, 2*pi)
    bool clockwise = false;

    /// Throws on violated invariants (0 < r_inner < r_outer, offset range,
    /// finite fields). Center-vs-image bounds are checked at map build
    /// time, where the raw dimensions are known.
    void validate() const;
};

PalCalibration load_calibration(const std::string& path);
void save_calibration(const std::string& path, const PalCalibration& calib);

/// Parses the JSON object format used by calibration files.
PalCalibration calibration_from_json_text(const std::string& text);
std::string calibration_to_json_text(const PalCalibration& calib);

/// Stable checksum over the calibration values; stored in sample-map
/// caches so a stale cache cannot be applied to a different lens setup.
std::uint64_t calibration_checksum(const PalCalibration& calib);

} // namespace palseg::pal
