#pragma once

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "palseg/common/png_io.hpp"
#include "palseg/data/manifest.hpp"
#include "palseg/pal/geometry.hpp"

namespace palseg::testsupport {

/// Unique scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("palseg_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

/// Gray annulus painted with `sectors` equal angular wedges; wedge k gets
/// value 20 + 25k. Pixels outside the ring keep `background`.
inline ImageU8 paint_sector_annulus(int raw_w, int raw_h, const pal::PalCalibration& calib,
                                    int sectors, std::uint8_t background = 255) {
    ImageU8 img(raw_w, raw_h, 1, background);
    for (int y = 0; y < raw_h; ++y) {
        for (int x = 0; x < raw_w; ++x) {
            const pal::PolarCoord p = pal::raw_to_polar(x, y, calib);
            if (p.r < calib.r_inner || p.r > calib.r_outer) continue;
            const int k = std::min(sectors - 1,
                                   static_cast<int>(p.theta / (2.0 * M_PI) * sectors));
            img.at(y, x) = static_cast<std::uint8_t>(20 + 25 * k);
        }
    }
    return img;
}

/// Gray annulus whose value rises linearly with radius: 0 at r_inner,
/// 255 at r_outer. Painted two pixels past the ring (values clamped) so
/// bilinear taps at the ring edge read the analytic field rather than
/// the background.
inline ImageU8 paint_radial_gradient(int raw_w, int raw_h, const pal::PalCalibration& calib,
                                     std::uint8_t background = 0) {
    ImageU8 img(raw_w, raw_h, 1, background);
    for (int y = 0; y < raw_h; ++y) {
        for (int x = 0; x < raw_w; ++x) {
            const pal::PolarCoord p = pal::raw_to_polar(x, y, calib);
            if (p.r < calib.r_inner - 2.0 || p.r > calib.r_outer + 2.0) continue;
            const double t = std::clamp(
                (p.r - calib.r_inner) / (calib.r_outer - calib.r_inner), 0.0, 1.0);
            img.at(y, x) = static_cast<std::uint8_t>(std::lround(t * 255.0));
        }
    }
    return img;
}

/// Synthetic segmentation dataset: per-pixel class drawn as diagonal
/// stripes (offset differs per sample), image channels strongly keyed to
/// the class so a tiny model can memorize it.
inline data::DatasetManifest make_synthetic_dataset(const std::string& root, int n_train,
                                                    int n_test, int size,
                                                    std::uint64_t seed = 7) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(root) / "images");
    fs::create_directories(fs::path(root) / "labels");

    data::DatasetManifest manifest;
    manifest.root = root;
    manifest.catalog = data::ClassCatalog::track_field_default();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 8.0);
    const int total = n_train + n_test;
    for (int i = 0; i < total; ++i) {
        ImageU8 image(size, size, 3);
        ImageU8 label(size, size, 1);
        const int offset = static_cast<int>(rng() % static_cast<std::uint64_t>(size));
        const int band = std::max(8, size / 8);
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                const int cls = ((x + y + offset) / band) % 3;
                label.at(y, x) = static_cast<std::uint8_t>(cls);
                for (int c = 0; c < 3; ++c) {
                    const double base = (c == cls) ? 220.0 : 40.0;
                    const double v = base + noise(rng);
                    image.at(y, x, c) =
                        static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
                }
            }
        }

        char name[32];
        std::snprintf(name, sizeof(name), "%04d.png", i);
        write_png((fs::path(root) / "images" / name).string(), image);
        write_png((fs::path(root) / "labels" / name).string(), label);

        data::ManifestEntry entry;
        entry.id = std::string(name, 4);
        entry.image_path = std::string("images/") + name;
        entry.label_path = std::string("labels/") + name;
        entry.split = i < n_train ? data::Split::train : data::Split::test;
        manifest.entries.push_back(std::move(entry));
    }
    data::save_manifest(manifest);
    return data::load_manifest(root);
}

} // namespace palseg::testsupport
