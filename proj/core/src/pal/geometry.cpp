#include "palseg/pal/geometry.hpp"

#include <cmath>
#include <numbers>

#include "palseg/common/check.hpp"

namespace palseg::pal {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_out_dims(int out_w, int out_h) {
    PALSEG_CHECK(out_w >= 1 && out_h >= 1,
                 "unfolded dimensions must be >= 1, got ", out_w, "x", out_h);
}
} // namespace

double normalize_angle(double theta) {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    // fmod of a value barely below a multiple of 2*pi can round up to 2*pi.
    if (t >= kTwoPi) t = 0.0;
    return t;
}

UnfoldedCoord annular_to_unfolded(double r, double theta, const PalCalibration& calib,
                                  int out_w, int out_h) {
    calib.validate();
    check_out_dims(out_w, out_h);
    PALSEG_CHECK(std::isfinite(r), "radius must be finite, got ", r);
    PALSEG_CHECK(std::isfinite(theta), "theta must be finite, got ", theta);

    UnfoldedCoord u;
    u.i = (r - calib.r_inner) / (calib.r_outer - calib.r_inner) * out_h;
    u.j = normalize_angle(theta) / kTwoPi * out_w;
    return u;
}

RawCoord unfolded_to_annular(double i, double j, const PalCalibration& calib,
                             int out_w, int out_h) {
    calib.validate();
    check_out_dims(out_w, out_h);
    PALSEG_CHECK(std::isfinite(i) && i >= 0.0 && i <= out_h,
                 "row coordinate out of range [0, ", out_h, "]: ", i);
    PALSEG_CHECK(std::isfinite(j) && j >= 0.0 && j < out_w,
                 "column coordinate out of range [0, ", out_w, "): ", j);

    const double r = calib.r_inner + (i / out_h) * (calib.r_outer - calib.r_inner);
    const double theta = kTwoPi * j / out_w;
    return polar_to_raw(r, theta, calib);
}

PolarCoord raw_to_polar(double x, double y, const PalCalibration& calib) {
    const double dx = x - calib.center_x;
    const double dy = y - calib.center_y;
    PolarCoord p;
    p.r = std::hypot(dx, dy);
    const double phi = std::atan2(dy, dx);
    const double signed_theta = calib.clockwise ? (calib.theta_offset - phi)
                                                : (phi - calib.theta_offset);
    p.theta = normalize_angle(signed_theta);
    return p;
}

RawCoord polar_to_raw(double r, double theta, const PalCalibration& calib) {
    const double phi = calib.clockwise ? (calib.theta_offset - theta)
                                       : (calib.theta_offset + theta);
    RawCoord c;
    c.x = calib.center_x + r * std::cos(phi);
    c.y = calib.center_y + r * std::sin(phi);
    return c;
}

UnfoldedCoord raw_to_unfolded(double x, double y, const PalCalibration& calib,
                              int out_w, int out_h) {
    const PolarCoord p = raw_to_polar(x, y, calib);
    return annular_to_unfolded(p.r, p.theta, calib, out_w, out_h);
}

} // namespace palseg::pal
