#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "palseg/pal/geometry.hpp"
#include "palseg/pal/sample_map.hpp"
#include "palseg/pal/unfold.hpp"
#include "support/fixtures.hpp"

using namespace palseg;
using namespace palseg::testsupport;

namespace {

constexpr double kPi = std::numbers::pi;

pal::PalCalibration basic_calib() {
    pal::PalCalibration c;
    c.center_x = 511.5;
    c.center_y = 511.5;
    c.r_inner = 120.0;
    c.r_outer = 480.0;
    return c;
}

double circular_column_distance(double a, double b, int width) {
    const double d = std::abs(a - b);
    return std::min(d, width - d);
}

} // namespace

TEST_CASE("annular_to_unfolded boundary values") {
    pal::PalCalibration c = basic_calib();
    c.r_inner = 100.0;
    c.r_outer = 400.0;

    auto u = pal::annular_to_unfolded(100.0, 0.0, c, 2048, 512);
    CHECK(u.i == doctest::Approx(0.0));
    CHECK(u.j == doctest::Approx(0.0));

    u = pal::annular_to_unfolded(400.0, kPi, c, 2048, 512);
    CHECK(u.i == doctest::Approx(512.0));
    CHECK(u.j == doctest::Approx(1024.0));

    u = pal::annular_to_unfolded(250.0, kPi / 2.0, c, 2048, 512);
    CHECK(u.i == doctest::Approx(256.0));
    CHECK(u.j == doctest::Approx(512.0));
}

TEST_CASE("annular_to_unfolded rejects non-finite inputs") {
    const pal::PalCalibration c = basic_calib();
    CHECK_THROWS_AS(pal::annular_to_unfolded(std::nan(""), 0.0, c, 64, 64), Error);
    CHECK_THROWS_AS(pal::annular_to_unfolded(200.0, INFINITY, c, 64, 64), Error);
}

TEST_CASE("unfolded_to_annular theta=0 axis") {
    const pal::PalCalibration c = basic_calib();
    const auto p = pal::unfolded_to_annular(0.0, 0.0, c, 2048, 512);
    CHECK(p.x == doctest::Approx(c.center_x + c.r_inner));
    CHECK(p.y == doctest::Approx(c.center_y));
}

TEST_CASE("calibration invariants rejected") {
    pal::PalCalibration c = basic_calib();
    c.r_inner = 500.0; // >= r_outer
    CHECK_THROWS_AS(c.validate(), Error);
    c = basic_calib();
    c.theta_offset = 7.0; // outside [0, 2*pi)
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("round-trip: 1e4 random unfolded coordinates within 1e-6 px") {
    for (const bool clockwise : {false, true}) {
        pal::PalCalibration c = basic_calib();
        c.theta_offset = 0.7;
        c.clockwise = clockwise;
        const int W = 2048, H = 512;

        std::mt19937_64 rng(42);
        std::uniform_real_distribution<double> di(0.0, static_cast<double>(H));
        std::uniform_real_distribution<double> dj(0.0, std::nextafter(2048.0, 0.0));

        double worst = 0.0;
        for (int t = 0; t < 10000; ++t) {
            const double i = di(rng);
            const double j = dj(rng);
            const auto raw = pal::unfolded_to_annular(i, j, c, W, H);
            const auto back = pal::raw_to_unfolded(raw.x, raw.y, c, W, H);
            worst = std::max(worst, std::abs(back.i - i));
            worst = std::max(worst, circular_column_distance(back.j, j, W));
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("monotonicity: i in r, j in theta") {
    const pal::PalCalibration c = basic_calib();
    double prev_i = -1.0;
    for (double r = c.r_inner; r <= c.r_outer; r += 10.0) {
        const auto u = pal::annular_to_unfolded(r, 1.0, c, 512, 256);
        CHECK(u.i > prev_i);
        prev_i = u.i;
    }
    double prev_j = -1.0;
    for (double theta = 0.0; theta < 2.0 * kPi - 1e-9; theta += 0.1) {
        const auto u = pal::annular_to_unfolded(200.0, theta, c, 512, 256);
        CHECK(u.j > prev_j);
        prev_j = u.j;
    }
}

TEST_CASE("sample map: annulus fully inside sensor is all valid") {
    const pal::PalCalibration c = basic_calib();
    const pal::SampleMap map = pal::build_sample_map(c, 256, 64, 1024, 1024);
    CHECK(map.width == 256);
    CHECK(map.height == 64);
    for (std::uint8_t v : map.valid) CHECK(v == 1);
}

TEST_CASE("sample map: paper-size output dimensions") {
    const pal::PalCalibration c = basic_calib();
    const pal::SampleMap map = pal::build_sample_map(c, 2048, 512, 1024, 1024);
    CHECK(map.width == 2048);
    CHECK(map.height == 512);
    CHECK(map.src_x.size() == 2048u * 512u);
}

TEST_CASE("sample map: validity equals brute-force membership oracle") {
    // Sensor-cropped ring: r_outer exceeds the raw half-height.
    pal::PalCalibration c;
    c.center_x = 383.5;
    c.center_y = 255.5;
    c.r_inner = 60.0;
    c.r_outer = 340.0;
    c.theta_offset = 0.3;
    const int raw_w = 768, raw_h = 512, W = 512, H = 128;

    const pal::SampleMap map = pal::build_sample_map(c, W, H, raw_w, raw_h);

    std::int64_t invalid = 0;
    for (int row = 0; row < H; ++row) {
        for (int col = 0; col < W; ++col) {
            // Independent evaluation of the closed-form inverse.
            const double i = row + 0.5, j = col + 0.5;
            const double r = c.r_inner + (i / H) * (c.r_outer - c.r_inner);
            const double theta = 2.0 * kPi * j / W;
            const double phi = c.theta_offset + theta;
            const double x = c.center_x + r * std::cos(phi);
            const double y = c.center_y + r * std::sin(phi);
            const bool in_image = x >= 0.0 && x <= raw_w - 1 && y >= 0.0 && y <= raw_h - 1;
            const bool in_ring = r >= c.r_inner && r <= c.r_outer;
            const bool expect = in_image && in_ring;
            REQUIRE(map.valid[map.index(row, col)] == (expect ? 1 : 0));
            if (!expect) ++invalid;
        }
    }
    // The crop must actually produce blind regions (the scalloped shadows).
    CHECK(invalid > 0);
}

TEST_CASE("sample map: cropped ring produces two shadow spans on the outer rows") {
    pal::PalCalibration c;
    c.center_x = 255.5;
    c.center_y = 191.5;
    c.r_inner = 50.0;
    c.r_outer = 240.0; // exceeds raw half-height 192
    const pal::SampleMap map = pal::build_sample_map(c, 512, 128, 512, 384);

    // Bottom row (outer radius): count contiguous invalid spans.
    int transitions = 0;
    const int row = map.height - 1;
    for (int col = 0; col < map.width; ++col) {
        const bool cur = map.valid[map.index(row, col)] != 0;
        const bool prev = map.valid[map.index(row, (col + map.width - 1) % map.width)] != 0;
        if (cur != prev) ++transitions;
    }
    CHECK(transitions == 4); // two invalid arcs
    // Inner radius stays fully visible.
    for (int col = 0; col < map.width; ++col) {
        CHECK(map.valid[map.index(0, col)] == 1);
    }
}

TEST_CASE("sample map: annulus entirely outside the image is a hard error") {
    pal::PalCalibration c = basic_calib();
    c.r_inner = 2000.0;
    c.r_outer = 3000.0;
    CHECK_THROWS_AS(pal::build_sample_map(c, 64, 32, 512, 512), Error);

    c = basic_calib();
    c.center_x = 5000.0; // center off-sensor
    CHECK_THROWS_AS(pal::build_sample_map(c, 64, 32, 512, 512), Error);
}

TEST_CASE("sample map: valid sources round-trip through the forward transform") {
    pal::PalCalibration c = basic_calib();
    c.theta_offset = 1.1;
    c.clockwise = true;
    const int W = 512, H = 128;
    const pal::SampleMap map = pal::build_sample_map(c, W, H, 1024, 1024);

    double worst = 0.0;
    for (int row = 0; row < H; row += 7) {
        for (int col = 0; col < W; col += 13) {
            const std::size_t idx = map.index(row, col);
            if (!map.valid[idx]) continue;
            const auto u = pal::raw_to_unfolded(map.src_x[idx], map.src_y[idx], c, W, H);
            worst = std::max(worst, std::abs(u.i - (row + 0.5)));
            worst = std::max(worst, circular_column_distance(u.j, col + 0.5, W));
        }
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("flip_rows maps row 0 to the outer radius") {
    const pal::PalCalibration c = basic_calib();
    const pal::SampleMap map = pal::build_sample_map(c, 64, 32, 1024, 1024, true);
    const double r0 = std::hypot(map.src_x[map.index(0, 0)] - c.center_x,
                                 map.src_y[map.index(0, 0)] - c.center_y);
    const double rl = std::hypot(map.src_x[map.index(31, 0)] - c.center_x,
                                 map.src_y[map.index(31, 0)] - c.center_y);
    CHECK(r0 > rl);
    CHECK(r0 == doctest::Approx(c.r_outer - 0.5 / 32.0 * (c.r_outer - c.r_inner)).epsilon(1e-9));
}

TEST_CASE("unfold: constant annulus stays constant on valid pixels") {
    const pal::PalCalibration c = basic_calib();
    const pal::SampleMap map = pal::build_sample_map(c, 256, 64, 1024, 1024);
    pal::AnnularImage annular{ImageU8(1024, 1024, 1, 137)};

    for (const auto interp : {pal::Interp::nearest, pal::Interp::bilinear}) {
        const pal::UnfoldedImage out = pal::unfold_image(annular, map, interp);
        for (int row = 0; row < 64; ++row) {
            for (int col = 0; col < 256; ++col) {
                REQUIRE(out.image.at(row, col) == 137);
            }
        }
    }
}

TEST_CASE("unfold: size mismatch between image and map is an error") {
    const pal::PalCalibration c = basic_calib();
    const pal::SampleMap map = pal::build_sample_map(c, 256, 64, 1024, 1024);
    pal::AnnularImage small{ImageU8(512, 512, 1)};
    CHECK_THROWS_AS(pal::unfold_image(small, map), Error);
}

TEST_CASE("unfold: 8 angular sectors become 8 vertical bands at analytic columns") {
    const pal::PalCalibration c = basic_calib();
    const int W = 2048, H = 512;
    const ImageU8 painted = paint_sector_annulus(1024, 1024, c, 8);
    const pal::SampleMap map = pal::build_sample_map(c, W, H, 1024, 1024);
    const pal::UnfoldedImage out =
        pal::unfold_image(pal::AnnularImage{painted}, map, pal::Interp::nearest);

    const int row = H / 2;
    std::set<int> values;
    for (int col = 0; col < W; ++col) {
        values.insert(out.image.at(row, col));
        // Analytic band index from the angular transform.
        const int sector = std::min(7, static_cast<int>((col + 0.5) / W * 8.0));
        const int expected = 20 + 25 * sector;
        // Columns within 1 px of an analytic boundary j = k/8*W may fall
        // on either side.
        bool near_boundary = false;
        for (int k = 0; k <= 8; ++k) {
            if (std::abs((col + 0.5) - k * (W / 8.0)) <= 1.0) near_boundary = true;
        }
        if (!near_boundary) {
            REQUIRE(out.image.at(row, col) == expected);
        }
    }
    CHECK(values.size() == 8);
}

TEST_CASE("unfold: radial gradient becomes row-constant and linear in i (bilinear)") {
    const pal::PalCalibration c = basic_calib();
    const int W = 512, H = 256;
    const ImageU8 painted = paint_radial_gradient(1024, 1024, c);
    const pal::SampleMap map = pal::build_sample_map(c, W, H, 1024, 1024);
    const pal::UnfoldedImage out =
        pal::unfold_image(pal::AnnularImage{painted}, map, pal::Interp::bilinear);

    for (int row = 0; row < H; ++row) {
        const double expected = (row + 0.5) / H * 255.0;
        for (int col = 0; col < W; ++col) {
            REQUIRE(std::abs(out.image.at(row, col) - expected) < 1.0);
        }
    }
}

TEST_CASE("unfold: nearest-neighbor label remap never invents values") {
    pal::PalCalibration c = basic_calib();
    c.r_outer = 600.0; // cropped -> blind areas filled with 0
    const pal::SampleMap map = pal::build_sample_map(c, 256, 64, 1024, 1024);

    std::mt19937_64 rng(3);
    ImageU8 labels(1024, 1024, 1);
    const std::uint8_t palette[3] = {11, 57, 203};
    for (auto& v : labels.data) v = palette[rng() % 3];

    const pal::UnfoldedImage out =
        pal::unfold_image(pal::AnnularImage{labels}, map, pal::Interp::nearest, 0);
    const std::set<int> allowed = {0, 11, 57, 203};
    for (std::uint8_t v : out.image.data) {
        REQUIRE(allowed.contains(static_cast<int>(v)));
    }
}

TEST_CASE("sample map cache round-trips and rejects stale calibration") {
    TempDir tmp("mapcache");
    const pal::PalCalibration c = basic_calib();
    const pal::SampleMap map = pal::build_sample_map(c, 128, 32, 1024, 1024);
    const std::string path = tmp.file("map.bin");
    pal::save_sample_map(path, map, c);

    const pal::SampleMap loaded = pal::load_sample_map(path, c);
    CHECK(loaded.width == map.width);
    CHECK(loaded.height == map.height);
    CHECK(loaded.src_x == map.src_x);
    CHECK(loaded.src_y == map.src_y);
    CHECK(loaded.valid == map.valid);

    pal::PalCalibration other = c;
    other.r_inner = 121.0;
    CHECK_THROWS_AS(pal::load_sample_map(path, other), Error);
}

TEST_CASE("validity mask image marks blind pixels") {
    pal::PalCalibration c;
    c.center_x = 255.5;
    c.center_y = 191.5;
    c.r_inner = 50.0;
    c.r_outer = 240.0;
    const pal::SampleMap map = pal::build_sample_map(c, 128, 64, 512, 384);
    const ImageU8 mask = pal::validity_mask_image(map);
    for (int row = 0; row < map.height; ++row) {
        for (int col = 0; col < map.width; ++col) {
            REQUIRE(mask.at(row, col) == (map.valid[map.index(row, col)] ? 255 : 0));
        }
    }
}
