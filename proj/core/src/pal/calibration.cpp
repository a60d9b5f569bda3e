#include "palseg/pal/calibration.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "palseg/common/check.hpp"
#include "palseg/common/hash.hpp"

namespace palseg::pal {

void PalCalibration::validate() const {
    PALSEG_CHECK(std::isfinite(center_x) && std::isfinite(center_y),
                 "calibration center must be finite");
    PALSEG_CHECK(std::isfinite(r_inner) && std::isfinite(r_outer),
                 "calibration radii must be finite");
    PALSEG_CHECK(r_inner > 0.0, "r_inner must be > 0, got ", r_inner);
    PALSEG_CHECK(r_inner < r_outer,
                 "r_inner must be < r_outer, got r_inner=", r_inner, " r_outer=", r_outer);
    PALSEG_CHECK(std::isfinite(theta_offset) && theta_offset >= 0.0 &&
                     theta_offset < 2.0 * std::numbers::pi,
                 "theta_offset must lie in [0, 2*pi), got ", theta_offset);
}

PalCalibration calibration_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        PALSEG_FAIL("calibration JSON parse error: ", e.what());
    }
    PalCalibration c;
    for (const char* key : {"center_x", "center_y", "r_inner", "r_outer"}) {
        PALSEG_CHECK(j.contains(key), "calibration missing required key '", key, "'");
    }
    c.center_x = j.at("center_x").get<double>();
    c.center_y = j.at("center_y").get<double>();
    c.r_inner = j.at("r_inner").get<double>();
    c.r_outer = j.at("r_outer").get<double>();
    c.theta_offset = j.value("theta_offset", 0.0);
    c.clockwise = j.value("clockwise", false);
    c.validate();
    return c;
}

std::string calibration_to_json_text(const PalCalibration& c) {
    nlohmann::json j = {
        {"center_x", c.center_x}, {"center_y", c.center_y},
        {"r_inner", c.r_inner},   {"r_outer", c.r_outer},
        {"theta_offset", c.theta_offset}, {"clockwise", c.clockwise},
    };
    return j.dump(2);
}

PalCalibration load_calibration(const std::string& path) {
    std::ifstream is(path);
    PALSEG_CHECK(is, "cannot open calibration file: ", path);
    std::ostringstream buf;
    buf << is.rdbuf();
    try {
        return calibration_from_json_text(buf.str());
    } catch (const Error& e) {
        PALSEG_FAIL(path, ": ", e.what());
    }
}

void save_calibration(const std::string& path, const PalCalibration& calib) {
    calib.validate();
    std::ofstream os(path, std::ios::trunc);
    PALSEG_CHECK(os, "cannot open calibration file for writing: ", path);
    os << calibration_to_json_text(calib) << "\n";
    PALSEG_CHECK(os.good(), "write failed: ", path);
}

std::uint64_t calibration_checksum(const PalCalibration& c) {
    // Hash the canonical JSON text so the checksum survives struct layout
    // changes.
    return fnv1a64(calibration_to_json_text(c));
}

} // namespace palseg::pal
