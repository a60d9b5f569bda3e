#include <iostream>

#include "commands.hpp"
#include "palseg/train/fit.hpp"

namespace palseg::cli {

void register_eval(CLI::App& app) {
    struct Options {
        std::string checkpoint;
        std::string data;
        std::string split = "test";
        bool allow_mismatch = false;
    };
    auto opt = std::make_shared<Options>();

    CLI::App* cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
    cmd->add_option("--checkpoint", opt->checkpoint, "Model checkpoint")->required();
    cmd->add_option("--data", opt->data, "Dataset root")->required();
    cmd->add_option("--split", opt->split, "Split to evaluate (default test)")
        ->check(CLI::IsMember({"train", "test"}));
    cmd->add_flag("--allow-config-mismatch", opt->allow_mismatch,
                  "Load despite a config-hash mismatch");

    cmd->callback([opt]() {
        const nn::CheckpointMeta meta = nn::read_checkpoint_meta(opt->checkpoint);
        const nn::ModelConfig model_cfg = nn::model_config_from_json_text(meta.config_json);
        nn::SegNet<float> model(model_cfg, 0);
        nn::load_checkpoint(opt->checkpoint, model, opt->allow_mismatch);

        const data::DatasetManifest manifest = data::load_manifest(opt->data);
        PALSEG_CHECK(manifest.catalog.num_classes() == model_cfg.num_classes,
                     "checkpoint predicts ", model_cfg.num_classes,
                     " classes but the dataset has ", manifest.catalog.num_classes());

        const metrics::IouReport report =
            train::evaluate_split(model, manifest, data::split_from_string(opt->split),
                                  train::normalization_from_extra(meta.extra_json));
        std::cout << report.to_json_text() << "\n";
        std::cerr << "IoU " << report.format_percent_row() << " (%)\n";
    });
}

} // namespace palseg::cli
