#include "palseg/pal/sample_map.hpp"

#include <cmath>
#include <cstring>

#include <json.hpp>

#include "palseg/common/check.hpp"
#include "palseg/common/container.hpp"
#include "palseg/common/hash.hpp"
#include "palseg/pal/geometry.hpp"

namespace palseg::pal {

SampleMap build_sample_map(const PalCalibration& calib, int out_w, int out_h,
                           int raw_w, int raw_h, bool flip_rows) {
    calib.validate();
    PALSEG_CHECK(out_w >= 1 && out_h >= 1, "unfolded dimensions must be positive, got ",
                 out_w, "x", out_h);
    PALSEG_CHECK(raw_w >= 1 && raw_h >= 1, "raw dimensions must be positive, got ",
                 raw_w, "x", raw_h);
    PALSEG_CHECK(calib.center_x >= 0.0 && calib.center_x <= raw_w - 1 &&
                     calib.center_y >= 0.0 && calib.center_y <= raw_h - 1,
                 "annulus center (", calib.center_x, ", ", calib.center_y,
                 ") lies outside the raw image ", raw_w, "x", raw_h);

    SampleMap map;
    map.width = out_w;
    map.height = out_h;
    map.raw_width = raw_w;
    map.raw_height = raw_h;
    map.flipped_rows = flip_rows;
    map.src_x.resize(map.pixel_count());
    map.src_y.resize(map.pixel_count());
    map.valid.resize(map.pixel_count());

#pragma omp parallel for schedule(static)
    for (int row = 0; row < out_h; ++row) {
        for (int col = 0; col < out_w; ++col) {
            const double i = flip_rows ? (out_h - (row + 0.5)) : (row + 0.5);
            const double j = col + 0.5;
            const RawCoord c = unfolded_to_annular(i, j, calib, out_w, out_h);

            const double dx = c.x - calib.center_x;
            const double dy = c.y - calib.center_y;
            const double r = std::hypot(dx, dy);
            const bool in_image = c.x >= 0.0 && c.x <= raw_w - 1 &&
                                  c.y >= 0.0 && c.y <= raw_h - 1;
            const bool in_ring = r >= calib.r_inner && r <= calib.r_outer;

            const std::size_t idx = map.index(row, col);
            map.src_x[idx] = c.x;
            map.src_y[idx] = c.y;
            map.valid[idx] = (in_image && in_ring) ? 1 : 0;
        }
    }

    bool any_valid = false;
    for (std::uint8_t v : map.valid) {
        if (v) { any_valid = true; break; }
    }
    PALSEG_CHECK(any_valid, "annulus [", calib.r_inner, ", ", calib.r_outer,
                 "] around (", calib.center_x, ", ", calib.center_y,
                 ") is entirely outside the ", raw_w, "x", raw_h, " raw image");
    return map;
}

void save_sample_map(const std::string& path, const SampleMap& map,
                     const PalCalibration& calib) {
    const std::size_t n = map.pixel_count();
    PALSEG_CHECK(map.src_x.size() == n && map.src_y.size() == n && map.valid.size() == n,
                 "sample map arrays are inconsistent with its dimensions");

    nlohmann::json header = {
        {"kind", "sample_map"},
        {"width", map.width},
        {"height", map.height},
        {"raw_width", map.raw_width},
        {"raw_height", map.raw_height},
        {"flipped_rows", map.flipped_rows},
        {"calibration_fnv1a", hex64(calibration_checksum(calib))},
        {"dtype", "f64"},
    };

    std::vector<std::uint8_t> payload(n * (2 * sizeof(double) + 1));
    std::memcpy(payload.data(), map.src_x.data(), n * sizeof(double));
    std::memcpy(payload.data() + n * sizeof(double), map.src_y.data(), n * sizeof(double));
    std::memcpy(payload.data() + 2 * n * sizeof(double), map.valid.data(), n);

    write_blob_file(path, header.dump(), payload.data(), payload.size());
}

SampleMap load_sample_map(const std::string& path, const PalCalibration& calib) {
    const BlobFile blob = read_blob_file(path);
    const nlohmann::json header = nlohmann::json::parse(blob.header_json);
    PALSEG_CHECK(header.value("kind", "") == "sample_map",
                 path, " is not a sample-map cache");

    const std::string want = hex64(calibration_checksum(calib));
    const std::string got = header.value("calibration_fnv1a", "");
    PALSEG_CHECK(got == want, "sample-map cache ", path,
                 " was built for a different calibration (checksum ", got,
                 ", expected ", want, ")");

    SampleMap map;
    map.width = header.at("width").get<int>();
    map.height = header.at("height").get<int>();
    map.raw_width = header.at("raw_width").get<int>();
    map.raw_height = header.at("raw_height").get<int>();
    map.flipped_rows = header.value("flipped_rows", false);

    const std::size_t n = map.pixel_count();
    PALSEG_CHECK(blob.payload.size() == n * (2 * sizeof(double) + 1),
                 "sample-map payload size mismatch in ", path);
    map.src_x.resize(n);
    map.src_y.resize(n);
    map.valid.resize(n);
    std::memcpy(map.src_x.data(), blob.payload.data(), n * sizeof(double));
    std::memcpy(map.src_y.data(), blob.payload.data() + n * sizeof(double), n * sizeof(double));
    std::memcpy(map.valid.data(), blob.payload.data() + 2 * n * sizeof(double), n);
    return map;
}

} // namespace palseg::pal
