#include "palseg/train/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "palseg/common/check.hpp"

namespace palseg::train {

void TrainConfig::validate() const {
    PALSEG_CHECK(lr_head > 0.0, "lr_head must be positive");
    PALSEG_CHECK(lr_min > 0.0 && lr_min <= lr_head,
                 "lr_min must satisfy 0 < lr_min <= lr_head, got lr_min=", lr_min,
                 " lr_head=", lr_head);
    PALSEG_CHECK(weight_decay >= 0.0, "weight_decay must be >= 0");
    PALSEG_CHECK(encoder_lr_divisor > 0.0, "encoder_lr_divisor must be positive");
    PALSEG_CHECK(epochs >= 1, "epochs must be >= 1");
    PALSEG_CHECK(batch_size >= 1, "batch_size must be >= 1");
    augment.validate();
    model.validate();
}

std::string train_config_to_json_text(const TrainConfig& cfg) {
    nlohmann::json j = {
        {"lr_head", cfg.lr_head},
        {"lr_min", cfg.lr_min},
        {"weight_decay", cfg.weight_decay},
        {"encoder_lr_divisor", cfg.encoder_lr_divisor},
        {"epochs", cfg.epochs},
        {"batch_size", cfg.batch_size},
        {"seed", cfg.seed},
        {"decoupled_weight_decay", cfg.decoupled_weight_decay},
        {"augment",
         {{"crop", {cfg.augment.crop_h, cfg.augment.crop_w}},
          {"scale_range", {cfg.augment.scale_min, cfg.augment.scale_max}},
          {"hflip", cfg.augment.hflip}}},
        {"normalization",
         {{"mean", cfg.normalization.mean}, {"std", cfg.normalization.stddev}}},
        {"model", nlohmann::json::parse(nn::model_config_to_json_text(cfg.model))},
    };
    return j.dump(2);
}

TrainConfig train_config_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        PALSEG_FAIL("train config JSON parse error: ", e.what());
    }

    TrainConfig cfg;
    cfg.lr_head = j.value("lr_head", cfg.lr_head);
    cfg.lr_min = j.value("lr_min", cfg.lr_min);
    cfg.weight_decay = j.value("weight_decay", cfg.weight_decay);
    cfg.encoder_lr_divisor = j.value("encoder_lr_divisor", cfg.encoder_lr_divisor);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.decoupled_weight_decay = j.value("decoupled_weight_decay", cfg.decoupled_weight_decay);

    if (j.contains("augment")) {
        const auto& a = j.at("augment");
        if (a.contains("crop")) {
            cfg.augment.crop_h = a.at("crop")[0].get<int>();
            cfg.augment.crop_w = a.at("crop")[1].get<int>();
        }
        if (a.contains("scale_range")) {
            cfg.augment.scale_min = a.at("scale_range")[0].get<double>();
            cfg.augment.scale_max = a.at("scale_range")[1].get<double>();
        }
        cfg.augment.hflip = a.value("hflip", cfg.augment.hflip);
    }
    if (j.contains("normalization")) {
        const auto& nrm = j.at("normalization");
        if (nrm.contains("mean")) {
            for (int c = 0; c < 3; ++c) {
                cfg.normalization.mean[static_cast<std::size_t>(c)] =
                    nrm.at("mean")[static_cast<std::size_t>(c)].get<float>();
            }
        }
        if (nrm.contains("std")) {
            for (int c = 0; c < 3; ++c) {
                cfg.normalization.stddev[static_cast<std::size_t>(c)] =
                    nrm.at("std")[static_cast<std::size_t>(c)].get<float>();
            }
        }
    }
    if (j.contains("model")) {
        cfg.model = nn::model_config_from_json_text(j.at("model").dump());
    }
    cfg.validate();
    return cfg;
}

TrainConfig load_train_config(const std::string& path) {
    std::ifstream is(path);
    PALSEG_CHECK(is, "cannot open train config: ", path);
    std::ostringstream buf;
    buf << is.rdbuf();
    try {
        return train_config_from_json_text(buf.str());
    } catch (const Error& e) {
        PALSEG_FAIL(path, ": ", e.what());
    }
}

} // namespace palseg::train
