#pragma once

#include "palseg/pal/calibration.hpp"

namespace palseg::pal {

struct UnfoldedCoord {
    double i = 0.0; // row coordinate, in [0, out_h]
    double j = 0.0; // column coordinate, in [0, out_w)
};

struct RawCoord {
    double x = 0.0;
    double y = 0.0;
};

struct PolarCoord {
    double r = 0.0;     // pixels from annulus center
    double theta = 0.0; // radians in [0, 2*pi)
};

/// Wraps an angle into [0, 2*pi).
double normalize_angle(double theta);

/// Ring coordinates to unfolded-image coordinates:
///   i = (r - r_inner) / (r_outer - r_inner) * out_h
///   j = theta / (2*pi) * out_w          (theta normalized to [0, 2*pi))
/// Rejects non-finite r/theta.
UnfoldedCoord annular_to_unfolded(double r, double theta, const PalCalibration& calib,
                                  int out_w, int out_h);

/// Inverse mapping: unfolded (i, j) to Cartesian raw-image coordinates.
/// r = r_inner + (i / out_h) * (r_outer - r_inner); theta = 2*pi * j / out_w;
/// phi = theta_offset +/- theta; (x, y) = center + r * (cos phi, sin phi).
RawCoord unfolded_to_annular(double i, double j, const PalCalibration& calib,
                             int out_w, int out_h);

/// Cartesian raw coordinates to ring coordinates under the calibration's
/// angular convention.
PolarCoord raw_to_polar(double x, double y, const PalCalibration& calib);

RawCoord polar_to_raw(double r, double theta, const PalCalibration& calib);

/// Composition raw -> polar -> unfolded; the forward transform used by
/// round-trip checks.
UnfoldedCoord raw_to_unfolded(double x, double y, const PalCalibration& calib,
                              int out_w, int out_h);

} // namespace palseg::pal
