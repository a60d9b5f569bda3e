#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <filesystem>
#include <random>
#include <set>

#include "palseg/data/augment.hpp"
#include "palseg/data/colorize.hpp"
#include "palseg/data/loader.hpp"
#include "palseg/data/validate.hpp"
#include "support/fixtures.hpp"

using namespace palseg;
using namespace palseg::testsupport;
namespace fs = std::filesystem;

namespace {

data::SegSample make_sample(int h, int w, std::uint64_t seed, int num_values = 3) {
    std::mt19937_64 rng(seed);
    data::SegSample s;
    s.id = "synthetic";
    s.image = nn::Tensor<float>({3, h, w});
    for (std::int64_t i = 0; i < s.image.numel(); ++i) {
        s.image[i] = static_cast<float>(rng() % 1000) / 1000.0f;
    }
    s.label = nn::Tensor<std::uint8_t>({h, w});
    for (std::int64_t i = 0; i < s.label.numel(); ++i) {
        s.label[i] = static_cast<std::uint8_t>(rng() % num_values);
    }
    return s;
}

} // namespace

TEST_CASE("manifest: fixture with 12 train + 2 test entries") {
    TempDir tmp("manifest");
    const data::DatasetManifest m = make_synthetic_dataset(tmp.str(), 12, 2, 16);
    CHECK(m.entries.size() == 14);
    CHECK(m.split_entries(data::Split::train).size() == 12);
    CHECK(m.split_entries(data::Split::test).size() == 2);
}

TEST_CASE("manifest: paper-scale split shape 420 train + 42 test") {
    TempDir tmp("manifest462");
    const data::DatasetManifest m = make_synthetic_dataset(tmp.str(), 420, 42, 8);
    CHECK(m.entries.size() == 462);
    CHECK(m.split_entries(data::Split::train).size() == 420);
    CHECK(m.split_entries(data::Split::test).size() == 42);
}

TEST_CASE("manifest: missing label file raises an error naming the path") {
    TempDir tmp("missing");
    make_synthetic_dataset(tmp.str(), 3, 1, 16);
    const std::string victim = (fs::path(tmp.str()) / "labels" / "0001.png").string();
    fs::remove(victim);
    try {
        data::load_manifest(tmp.str());
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("0001.png") != std::string::npos);
    }
}

TEST_CASE("manifest: duplicate sample id is rejected") {
    TempDir tmp("dup");
    make_synthetic_dataset(tmp.str(), 2, 1, 16);
    // Duplicate an id across splits by editing the manifest.
    std::ifstream is(tmp.file("manifest.json"));
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    is.close();
    const auto pos = text.find("\"0002\"");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 6, "\"0000\"");
    std::ofstream os(tmp.file("manifest.json"), std::ios::trunc);
    os << text;
    os.close();
    CHECK_THROWS_AS(data::load_manifest(tmp.str()), Error);
}

TEST_CASE("validate_sample: out-of-range label value is listed") {
    const data::ClassCatalog catalog = data::ClassCatalog::track_field_default();
    data::SegSample s = make_sample(8, 8, 1);
    s.label[5] = 3; // == K, invalid
    const data::SampleReport rep = data::validate_sample(s, catalog);
    CHECK_FALSE(rep.ok());
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].find("label value 3") != std::string::npos);
}

TEST_CASE("validate_sample: all-zeros mask counts H*W pixels for class 0") {
    const data::ClassCatalog catalog = data::ClassCatalog::track_field_default();
    data::SegSample s = make_sample(8, 10, 2);
    s.label.fill(0);
    const data::SampleReport rep = data::validate_sample(s, catalog);
    CHECK(rep.ok());
    CHECK(rep.class_pixels[0] == 80);
    CHECK(rep.class_pixels[1] == 0);
}

TEST_CASE("validate_sample: per-class counts equal a brute-force histogram") {
    const data::ClassCatalog catalog = data::ClassCatalog::track_field_default();
    const data::SegSample s = make_sample(32, 32, 3);
    const data::SampleReport rep = data::validate_sample(s, catalog);

    std::array<std::int64_t, 3> expected{0, 0, 0};
    for (std::int64_t i = 0; i < s.label.numel(); ++i) {
        expected[s.label[i]] += 1;
    }
    for (int c = 0; c < 3; ++c) {
        CHECK(rep.class_pixels[static_cast<std::size_t>(c)] ==
              expected[static_cast<std::size_t>(c)]);
    }
}

TEST_CASE("augment: identity configuration is the identity") {
    data::AugmentConfig cfg;
    cfg.crop_h = 64;
    cfg.crop_w = 64;
    cfg.scale_min = cfg.scale_max = 1.0;
    cfg.hflip = false;

    const data::SegSample s = make_sample(64, 64, 4);
    data::AugmentRecord rec;
    const data::SegSample out = data::augment(s, 99, cfg, &rec);
    CHECK(rec.scale == 1.0);
    CHECK_FALSE(rec.flipped);
    CHECK(out.label.vec() == s.label.vec());
    for (std::int64_t i = 0; i < s.image.numel(); ++i) {
        REQUIRE(out.image[i] == doctest::Approx(s.image[i]).epsilon(1e-6));
    }
}

TEST_CASE("augment: horizontal flip maps column c to W-1-c") {
    data::AugmentConfig cfg;
    cfg.crop_h = 32;
    cfg.crop_w = 32;
    cfg.scale_min = cfg.scale_max = 1.0;
    cfg.hflip = true;

    const data::SegSample s = make_sample(32, 32, 5);
    bool saw_flip = false;
    for (std::uint64_t seed = 0; seed < 32 && !saw_flip; ++seed) {
        data::AugmentRecord rec;
        const data::SegSample out = data::augment(s, seed, cfg, &rec);
        if (!rec.flipped) continue;
        saw_flip = true;
        for (int y = 0; y < 32; ++y) {
            for (int x = 0; x < 32; ++x) {
                REQUIRE(out.label.at2(y, x) == s.label.at2(y, 31 - x));
                REQUIRE(out.image[static_cast<std::int64_t>(y) * 32 + x] ==
                        doctest::Approx(s.image[static_cast<std::int64_t>(y) * 32 + 31 - x]));
            }
        }
    }
    CHECK(saw_flip);
}

TEST_CASE("augment: 100 seeded draws honor scale range and crop size") {
    data::AugmentConfig cfg; // defaults: crop 512, scale [0.5, 2], hflip
    const data::SegSample s = make_sample(600, 600, 6);

    std::set<std::uint64_t> label_values_in;
    for (std::int64_t i = 0; i < s.label.numel(); ++i) label_values_in.insert(s.label[i]);

    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        data::AugmentRecord rec;
        const data::SegSample out = data::augment(s, seed, cfg, &rec);
        REQUIRE(rec.scale >= 0.5);
        REQUIRE(rec.scale <= 2.0);
        REQUIRE(out.label.dim(0) == 512);
        REQUIRE(out.label.dim(1) == 512);
        REQUIRE(out.image.shape() == std::vector<std::int64_t>{3, 512, 512});
        // Output labels never leave source values + ignore padding.
        for (std::int64_t i = 0; i < out.label.numel(); ++i) {
            const std::uint8_t v = out.label[i];
            REQUIRE((label_values_in.contains(v) || v == 255));
        }
    }
}

TEST_CASE("augment: deterministic under a fixed seed") {
    data::AugmentConfig cfg;
    const data::SegSample s = make_sample(600, 520, 7);
    const data::SegSample a = data::augment(s, 4242, cfg);
    const data::SegSample b = data::augment(s, 4242, cfg);
    CHECK(a.label.vec() == b.label.vec());
    CHECK(a.image.vec() == b.image.vec());
}

TEST_CASE("augment: recorded transform reproduces the output label exactly") {
    data::AugmentConfig cfg;
    cfg.crop_h = 128;
    cfg.crop_w = 128;
    const data::SegSample s = make_sample(200, 170, 8);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        data::AugmentRecord rec;
        const data::SegSample out = data::augment(s, seed, cfg, &rec);
        const nn::Tensor<std::uint8_t> replay = data::apply_record_to_label(s.label, rec, cfg);
        REQUIRE(replay.vec() == out.label.vec());
    }
}

TEST_CASE("augment: degenerate scale rejected at config validation") {
    data::AugmentConfig cfg;
    cfg.scale_min = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.scale_min = 2.0;
    cfg.scale_max = 0.5;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("colorize: solid class renders the catalog color") {
    const data::ClassCatalog catalog = data::ClassCatalog::track_field_default();
    nn::Tensor<std::uint8_t> mask({4, 4}, 1);
    const ImageU8 img = data::colorize(mask, catalog);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) {
            REQUIRE(img.at(y, x, 0) == 255); // field is red
            REQUIRE(img.at(y, x, 1) == 0);
            REQUIRE(img.at(y, x, 2) == 0);
        }
    }
}

TEST_CASE("colorize/decode round-trips a random mask") {
    const data::ClassCatalog catalog = data::ClassCatalog::track_field_default();
    std::mt19937_64 rng(9);
    nn::Tensor<std::uint8_t> mask({16, 16});
    for (std::int64_t i = 0; i < mask.numel(); ++i) {
        const auto r = rng() % 4;
        mask[i] = r == 3 ? 255 : static_cast<std::uint8_t>(r);
    }
    const nn::Tensor<std::uint8_t> back = data::decode_color(data::colorize(mask, catalog), catalog);
    CHECK(back.vec() == mask.vec());
}

TEST_CASE("colorize: checkerboard matches a direct palette lookup") {
    const data::ClassCatalog catalog = data::ClassCatalog::track_field_default();
    nn::Tensor<std::uint8_t> mask({8, 8});
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            mask.at2(y, x) = static_cast<std::uint8_t>((x + y) % 3);
        }
    }
    const ImageU8 img = data::colorize(mask, catalog);
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            const auto& expect = catalog.entry((x + y) % 3).color;
            for (int c = 0; c < 3; ++c) {
                REQUIRE(img.at(y, x, c) == expect[static_cast<std::size_t>(c)]);
            }
        }
    }
}

TEST_CASE("decode_color: unknown color error names the pixel") {
    const data::ClassCatalog catalog = data::ClassCatalog::track_field_default();
    ImageU8 img(4, 4, 3, 0);
    img.at(2, 3, 0) = 7; // not a catalog color
    try {
        data::decode_color(img, catalog);
        FAIL("expected an error");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("(3, 2)") != std::string::npos);
    }
}

TEST_CASE("load_sample: blind-area mask forces labels to ignore") {
    TempDir tmp("masked");
    data::DatasetManifest m = make_synthetic_dataset(tmp.str(), 1, 0, 16);

    // Attach a mask that blanks the left half.
    fs::create_directories(fs::path(tmp.str()) / "masks");
    ImageU8 mask(16, 16, 1, 255);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 8; ++x) mask.at(y, x) = 0;
    }
    write_png(tmp.file("masks/0000.png"), mask);
    m.entries[0].mask_path = "masks/0000.png";
    data::save_manifest(m);
    m = data::load_manifest(tmp.str());

    const data::SegSample s = data::load_sample(m, m.entries[0]);
    REQUIRE(s.has_mask());
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 8; ++x) REQUIRE(s.label.at2(y, x) == 255);
        for (int x = 8; x < 16; ++x) REQUIRE(s.label.at2(y, x) != 255);
    }
}

TEST_CASE("validate_dataset aggregates split counts into a JSON report") {
    TempDir tmp("report");
    const data::DatasetManifest m = make_synthetic_dataset(tmp.str(), 3, 2, 16);
    const data::DatasetReport rep = data::validate_dataset(m);
    CHECK(rep.ok());
    CHECK(rep.train_samples == 3);
    CHECK(rep.test_samples == 2);
    const std::string json = rep.to_json_text();
    CHECK(json.find("\"total_samples\": 5") != std::string::npos);
}
