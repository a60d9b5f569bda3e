#include <filesystem>
#include <iostream>

#include "commands.hpp"
#include "palseg/common/png_io.hpp"
#include "palseg/data/colorize.hpp"
#include "palseg/nn/ops.hpp"
#include "palseg/train/fit.hpp"

namespace fs = std::filesystem;

namespace palseg::cli {

namespace {

/// Fallback palette for class counts without a canonical catalog.
data::ClassCatalog palette_for(int num_classes) {
    if (num_classes == 3) return data::ClassCatalog::track_field_default();
    data::ClassCatalog c;
    c.entries.clear();
    const std::array<std::array<std::uint8_t, 3>, 8> base = {{{0, 255, 0},
                                                              {255, 0, 0},
                                                              {128, 128, 128},
                                                              {0, 0, 255},
                                                              {255, 255, 0},
                                                              {255, 0, 255},
                                                              {0, 255, 255},
                                                              {255, 128, 0}}};
    for (int i = 0; i < num_classes; ++i) {
        std::array<std::uint8_t, 3> color = base[static_cast<std::size_t>(i % 8)];
        color[0] = static_cast<std::uint8_t>(color[0] ^ (i / 8 * 32));
        c.entries.push_back({i, "class" + std::to_string(i), color});
    }
    c.ignore_id = 255;
    c.ignore_color = {0, 0, 0};
    return c;
}

} // namespace

void register_predict(CLI::App& app) {
    struct Options {
        std::string checkpoint;
        std::string image;
        std::string out;
        bool overlay = false;
    };
    auto opt = std::make_shared<Options>();

    CLI::App* cmd =
        app.add_subcommand("predict", "Run inference on one image and write a colorized mask");
    cmd->add_option("--checkpoint", opt->checkpoint, "Model checkpoint")->required();
    cmd->add_option("--image", opt->image, "Input PNG")->required();
    cmd->add_option("--out", opt->out, "Output colorized label PNG")->required();
    cmd->add_flag("--overlay", opt->overlay, "Also write an alpha-blended overlay PNG");

    cmd->callback([opt]() {
        const nn::CheckpointMeta meta = nn::read_checkpoint_meta(opt->checkpoint);
        const nn::ModelConfig model_cfg = nn::model_config_from_json_text(meta.config_json);
        nn::SegNet<float> model(model_cfg, 0);
        nn::load_checkpoint(opt->checkpoint, model);

        const ImageU8 img = read_png(opt->image);
        PALSEG_CHECK(img.height % 32 == 0 && img.width % 32 == 0, "input is ", img.width,
                     "x", img.height,
                     "; pad or unfold to dimensions divisible by 32 before predicting");

        const data::Normalization norm = train::normalization_from_extra(meta.extra_json);
        nn::Tensor<float> chw = data::image_to_tensor(img);
        nn::Tensor<float> input({1, 3, img.height, img.width});
        const std::int64_t hw = static_cast<std::int64_t>(img.height) * img.width;
        for (int c = 0; c < 3; ++c) {
            const float mean = norm.mean[static_cast<std::size_t>(c)];
            const float inv_std = 1.0f / norm.stddev[static_cast<std::size_t>(c)];
            for (std::int64_t i = 0; i < hw; ++i) {
                input[c * hw + i] = (chw[c * hw + i] - mean) * inv_std;
            }
        }

        nn::NoGradGuard no_grad;
        auto logits = model.forward(nn::make_var(std::move(input)), false);
        const nn::Tensor<std::uint8_t> pred_batch = nn::argmax_channels(logits->value);
        const nn::Tensor<std::uint8_t> pred = pred_batch.reshaped({img.height, img.width});

        const data::ClassCatalog catalog = palette_for(model_cfg.num_classes);
        if (const fs::path parent = fs::path(opt->out).parent_path(); !parent.empty()) {
            fs::create_directories(parent);
        }
        write_png(opt->out, data::colorize(pred, catalog));
        if (opt->overlay) {
            fs::path overlay_path(opt->out);
            overlay_path.replace_filename(overlay_path.stem().string() + "_overlay.png");
            write_png(overlay_path.string(), data::overlay(img, pred, catalog, 0.5));
        }
        std::cerr << "wrote " << opt->out << "\n";
    });
}

} // namespace palseg::cli
