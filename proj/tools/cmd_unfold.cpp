#include <algorithm>
#include <filesystem>
#include <iostream>

#include "commands.hpp"
#include "palseg/common/png_io.hpp"
#include "palseg/pal/unfold.hpp"

namespace fs = std::filesystem;

namespace palseg::cli {

namespace {

struct UnfoldOptions {
    std::string calib_path;
    std::string input;
    std::string output;
    int width = 2048;
    int height = 512;
    std::string interp = "bilinear";
    bool emit_mask = false;
    bool flip_rows = false;
    int fill = 0;
    std::string cache_map;
};

void run_unfold(const UnfoldOptions& opt) {
    const pal::PalCalibration calib = pal::load_calibration(opt.calib_path);
    const pal::Interp interp =
        opt.interp == "nearest" ? pal::Interp::nearest : pal::Interp::bilinear;

    std::vector<fs::path> inputs;
    const bool dir_mode = fs::is_directory(opt.input);
    if (dir_mode) {
        for (const auto& e : fs::directory_iterator(opt.input)) {
            if (e.path().extension() == ".png") inputs.push_back(e.path());
        }
        std::sort(inputs.begin(), inputs.end());
        PALSEG_CHECK(!inputs.empty(), "no .png files under ", opt.input);
        fs::create_directories(opt.output);
    } else {
        PALSEG_CHECK(fs::exists(opt.input), "input image not found: ", opt.input);
        inputs.push_back(opt.input);
        if (const fs::path parent = fs::path(opt.output).parent_path(); !parent.empty()) {
            fs::create_directories(parent);
        }
    }

    pal::SampleMap map;
    bool map_ready = false;
    for (const auto& in_path : inputs) {
        pal::AnnularImage annular{read_png(in_path.string())};
        if (!map_ready) {
            if (!opt.cache_map.empty() && fs::exists(opt.cache_map)) {
                map = pal::load_sample_map(opt.cache_map, calib);
                PALSEG_CHECK(map.width == opt.width && map.height == opt.height &&
                                 map.raw_width == annular.image.width &&
                                 map.raw_height == annular.image.height,
                             "cached sample map dimensions do not match this invocation");
            } else {
                map = pal::build_sample_map(calib, opt.width, opt.height,
                                            annular.image.width, annular.image.height,
                                            opt.flip_rows);
                if (!opt.cache_map.empty()) pal::save_sample_map(opt.cache_map, map, calib);
            }
            map_ready = true;
        }

        const pal::UnfoldedImage out =
            pal::unfold_image(annular, map, interp, static_cast<std::uint8_t>(opt.fill));
        const fs::path out_path =
            dir_mode ? fs::path(opt.output) / in_path.filename() : fs::path(opt.output);
        write_png(out_path.string(), out.image);
        if (opt.emit_mask) {
            fs::path mask_path = out_path;
            mask_path.replace_filename(out_path.stem().string() + "_mask.png");
            write_png(mask_path.string(), pal::validity_mask_image(map));
        }
        std::cerr << "unfolded " << in_path.string() << " -> " << out_path.string() << "\n";
    }
}

} // namespace

void register_unfold(CLI::App& app) {
    auto opt = std::make_shared<UnfoldOptions>();
    CLI::App* cmd =
        app.add_subcommand("unfold", "Unfold raw annular images into rectangular panoramas");
    cmd->add_option("--calib", opt->calib_path, "Calibration JSON file")->required();
    cmd->add_option("--in", opt->input, "Input PNG or directory of PNGs")->required();
    cmd->add_option("--out", opt->output, "Output PNG or directory")->required();
    cmd->add_option("--width", opt->width, "Unfolded width (default 2048)");
    cmd->add_option("--height", opt->height, "Unfolded height (default 512)");
    cmd->add_option("--interp", opt->interp, "Interpolation: bilinear or nearest")
        ->check(CLI::IsMember({"bilinear", "nearest"}));
    cmd->add_flag("--emit-mask", opt->emit_mask, "Also write validity-mask PNGs");
    cmd->add_flag("--flip-rows", opt->flip_rows, "Row 0 maps to the outer radius");
    cmd->add_option("--fill", opt->fill, "Fill value for blind pixels (default 0)")
        ->check(CLI::Range(0, 255));
    cmd->add_option("--cache-map", opt->cache_map, "Sample-map cache file to load/save");
    cmd->callback([opt]() { run_unfold(*opt); });
}

} // namespace palseg::cli
