#include <iostream>

#include <json.hpp>

#include "commands.hpp"
#include "palseg/train/fit.hpp"

namespace palseg::cli {

void register_train(CLI::App& app) {
    struct Options {
        std::string config;
        std::string data;
        std::string out;
        bool resume = false;
    };
    auto opt = std::make_shared<Options>();

    CLI::App* cmd = app.add_subcommand("train", "Train the segmentation network");
    cmd->add_option("--config", opt->config, "TrainConfig JSON file")->required();
    cmd->add_option("--data", opt->data, "Dataset root")->required();
    cmd->add_option("--out", opt->out, "Output directory for checkpoints and logs")
        ->required();
    cmd->add_flag("--resume", opt->resume, "Resume from <out>/last.ckpt");

    cmd->callback([opt]() {
        const train::TrainConfig cfg = train::load_train_config(opt->config);
        const data::DatasetManifest manifest = data::load_manifest(opt->data);
        PALSEG_CHECK(cfg.model.num_classes == manifest.catalog.num_classes(),
                     "config expects ", cfg.model.num_classes, " classes but the dataset has ",
                     manifest.catalog.num_classes());

        auto model = nn::build_model<float>(cfg.model, cfg.seed);
        const train::FitResult result =
            train::fit(*model, manifest, cfg, opt->out, opt->resume, &std::cerr);

        nlohmann::json j = {{"best_checkpoint", result.best_checkpoint},
                            {"last_checkpoint", result.last_checkpoint},
                            {"log", result.log_path},
                            {"best_miou", result.best_miou},
                            {"epochs_run", result.epochs_run}};
        std::cout << j.dump(2) << "\n";
    });
}

} // namespace palseg::cli
