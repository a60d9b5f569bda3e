#include "palseg/train/fit.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "palseg/nn/ops.hpp"

namespace fs = std::filesystem;

namespace palseg::train {

nn::CeLoss<float> loss(const nn::VarPtr<float>& logits,
                       const nn::Tensor<std::int32_t>& labels, int ignore_id) {
    return nn::cross_entropy(logits, labels, ignore_id);
}

metrics::IouReport evaluate_split(nn::SegNet<float>& model,
                                  const data::DatasetManifest& manifest, data::Split split,
                                  const data::Normalization& norm) {
    const auto entries = manifest.split_entries(split);
    PALSEG_CHECK(!entries.empty(), "evaluation split '", to_string(split), "' is empty");

    metrics::ConfusionMatrix cm(manifest.catalog.num_classes());
    nn::NoGradGuard no_grad;
    for (const auto& entry : entries) {
        const data::SegSample sample = data::load_sample(manifest, entry);
        nn::Tensor<float> images;
        nn::Tensor<std::int32_t> labels;
        data::make_batch({sample}, norm, images, labels);

        auto x = nn::make_var(std::move(images));
        auto logits = model.forward(x, false);
        const nn::Tensor<std::uint8_t> pred_batch = nn::argmax_channels(logits->value);
        nn::Tensor<std::uint8_t> pred({sample.label.dim(0), sample.label.dim(1)});
        std::copy(pred_batch.data(), pred_batch.data() + pred.numel(), pred.data());
        cm.update(pred, sample.label, manifest.catalog.ignore_id);
    }
    return metrics::iou_report(cm, manifest.catalog);
}

namespace {

/// Per-epoch derived stream: resume at an epoch boundary replays the
/// identical shuffle and augmentation draws without mutable RNG state.
std::uint64_t derived_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t h = base ^ 0x9e3779b97f4a7c15ULL;
    h ^= (a + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    h *= 0xff51afd7ed558ccdULL;
    h ^= (b + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    h *= 0xc4ceb9fe1a85ec53ULL;
    return h ^ (h >> 33);
}

struct TrainState {
    int epoch_next = 0;
    std::int64_t global_step = 0;
    double best_miou = 0.0;
};

std::string state_to_json(const TrainState& s, const data::Normalization& norm) {
    nlohmann::json j = {{"epoch_next", s.epoch_next},
                        {"global_step", s.global_step},
                        {"best_miou", s.best_miou},
                        {"normalization", {{"mean", norm.mean}, {"std", norm.stddev}}}};
    return j.dump();
}

TrainState state_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    TrainState s;
    s.epoch_next = j.value("epoch_next", 0);
    s.global_step = j.value("global_step", std::int64_t(0));
    s.best_miou = j.value("best_miou", 0.0);
    return s;
}

} // namespace

data::Normalization normalization_from_extra(const std::string& extra_json) {
    data::Normalization norm;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(extra_json);
    } catch (const nlohmann::json::exception&) {
        return norm;
    }
    if (j.contains("normalization")) {
        const auto& n = j.at("normalization");
        for (int c = 0; c < 3; ++c) {
            const auto ci = static_cast<std::size_t>(c);
            if (n.contains("mean")) norm.mean[ci] = n.at("mean")[ci].get<float>();
            if (n.contains("std")) norm.stddev[ci] = n.at("std")[ci].get<float>();
        }
    }
    return norm;
}

FitResult fit(nn::SegNet<float>& model, const data::DatasetManifest& manifest,
              const TrainConfig& cfg, const std::string& out_dir, bool resume,
              std::ostream* progress, int epoch_limit) {
    cfg.validate();
    PALSEG_CHECK(manifest.catalog.num_classes() == model.config().num_classes,
                 "model predicts ", model.config().num_classes, " classes but the dataset has ",
                 manifest.catalog.num_classes());

    const auto train_entries = manifest.split_entries(data::Split::train);
    PALSEG_CHECK(!train_entries.empty(), "training split is empty");
    const bool have_test = !manifest.split_entries(data::Split::test).empty();

    fs::create_directories(out_dir);
    const std::string last_path = (fs::path(out_dir) / "last.ckpt").string();
    const std::string best_path = (fs::path(out_dir) / "best.ckpt").string();
    const std::string log_path = (fs::path(out_dir) / "train_log.jsonl").string();

    TrainState state;
    if (resume) {
        PALSEG_CHECK(fs::exists(last_path), "cannot resume: no checkpoint at ", last_path);
        const nn::CheckpointMeta meta = nn::load_checkpoint(last_path, model);
        state = state_from_json(meta.extra_json);
        PALSEG_CHECK(state.epoch_next < cfg.epochs, "checkpoint at ", last_path,
                     " already finished the ", cfg.epochs, "-epoch schedule");
    }

    auto groups = model.param_groups();
    std::vector<nn::VarPtr<float>> head_params, encoder_params;
    for (const auto& e : groups.head) head_params.push_back(e.param);
    for (const auto& e : groups.encoder) encoder_params.push_back(e.param);
    Adam<float> adam({ParamGroup<float>{head_params, cfg.lr_head, cfg.weight_decay},
                      ParamGroup<float>{encoder_params, cfg.lr_head / cfg.encoder_lr_divisor,
                                        cfg.weight_decay / cfg.encoder_lr_divisor}},
                     0.9, 0.999, 1e-8, cfg.decoupled_weight_decay);

    std::ofstream log(log_path, resume ? std::ios::app : std::ios::trunc);
    PALSEG_CHECK(log, "cannot open training log ", log_path);

    const WdPair wd = group_weight_decay(cfg);
    const int steps_per_epoch =
        static_cast<int>((train_entries.size() + cfg.batch_size - 1) / cfg.batch_size);

    FitResult result;
    result.best_miou = state.best_miou;
    result.last_checkpoint = last_path;
    result.best_checkpoint = best_path;
    result.log_path = log_path;

    for (int epoch = state.epoch_next; epoch < cfg.epochs; ++epoch) {
        const LrPair lr = cosine_lr(epoch, cfg);
        adam.set_rates(0, lr.head, wd.head);
        adam.set_rates(1, lr.encoder, wd.encoder);

        std::vector<std::size_t> order(train_entries.size());
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 shuffle_rng(derived_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double loss_sum = 0.0;
        bool all_ignored_seen = false;
        for (int step = 0; step < steps_per_epoch; ++step) {
            std::vector<data::SegSample> batch;
            std::string batch_ids;
            for (int k = 0; k < cfg.batch_size; ++k) {
                const std::size_t idx =
                    order[(static_cast<std::size_t>(step) * cfg.batch_size + k) % order.size()];
                const auto& entry = train_entries[idx];
                data::SegSample sample = data::load_sample(manifest, entry);
                const std::uint64_t aug_seed =
                    derived_seed(cfg.seed, (static_cast<std::uint64_t>(epoch) << 24) ^
                                               static_cast<std::uint64_t>(step),
                                 static_cast<std::uint64_t>(k));
                data::AugmentConfig aug = cfg.augment;
                aug.ignore_id = manifest.catalog.ignore_id;
                batch.push_back(data::augment(sample, aug_seed, aug));
                batch_ids += (batch_ids.empty() ? "" : ",") + entry.id;
            }

            nn::Tensor<float> images;
            nn::Tensor<std::int32_t> labels;
            data::make_batch(batch, cfg.normalization, images, labels);

            adam.zero_grad();
            auto x = nn::make_var(std::move(images));
            auto logits = model.forward(x, true);
            nn::CeLoss<float> step_loss =
                nn::cross_entropy(logits, labels, manifest.catalog.ignore_id);
            const double loss_value = step_loss.value->value[0];
            PALSEG_CHECK(std::isfinite(loss_value), "non-finite loss at epoch ", epoch,
                         " step ", step, " (lr_head=", lr.head, ", batch ids: ", batch_ids,
                         ")");
            if (step_loss.scored_pixels == 0) {
                all_ignored_seen = true;
            } else {
                nn::backward(step_loss.value);
                adam.step();
            }
            loss_sum += loss_value;
            ++state.global_step;
        }

        double miou = 0.0, pixel_acc = 0.0;
        if (have_test) {
            const metrics::IouReport rep =
                evaluate_split(model, manifest, data::Split::test, cfg.normalization);
            miou = rep.mean_iou;
            pixel_acc = rep.pixel_accuracy;
        }

        nlohmann::json line = {{"epoch", epoch},
                               {"steps", steps_per_epoch},
                               {"loss", loss_sum / steps_per_epoch},
                               {"lr_head", lr.head},
                               {"lr_encoder", lr.encoder},
                               {"miou", miou},
                               {"pixel_accuracy", pixel_acc}};
        if (all_ignored_seen) line["warning"] = "batch with all pixels ignored";
        log << line.dump() << "\n";
        log.flush();
        if (progress) {
            (*progress) << "epoch " << epoch << " loss " << loss_sum / steps_per_epoch
                        << " lr " << lr.head << " miou " << miou << "\n";
        }

        state.epoch_next = epoch + 1;
        if (have_test && miou >= result.best_miou) {
            result.best_miou = miou;
            state.best_miou = miou;
            nn::CheckpointMeta best_meta;
            best_meta.epoch = epoch + 1;
            best_meta.best_metric = result.best_miou;
            best_meta.extra_json = state_to_json(state, cfg.normalization);
            nn::save_checkpoint(best_path, model, best_meta);
        }
        nn::CheckpointMeta meta;
        meta.epoch = epoch + 1;
        meta.best_metric = result.best_miou;
        meta.extra_json = state_to_json(state, cfg.normalization);
        nn::save_checkpoint(last_path, model, meta);
        ++result.epochs_run;
        if (epoch_limit >= 0 && result.epochs_run >= epoch_limit) break;
    }

    if (!have_test && !fs::exists(best_path)) {
        // No test split to rank by; the last weights double as best.
        nn::CheckpointMeta meta;
        meta.epoch = cfg.epochs;
        meta.best_metric = 0.0;
        meta.extra_json = state_to_json(state, cfg.normalization);
        nn::save_checkpoint(best_path, model, meta);
    }
    return result;
}

} // namespace palseg::train
