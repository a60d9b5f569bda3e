#include "palseg/metrics/confusion.hpp"

#include <cstdio>

#include <json.hpp>

#include "palseg/common/check.hpp"

namespace palseg::metrics {

ConfusionMatrix::ConfusionMatrix(int num_classes) : k_(num_classes) {
    PALSEG_CHECK(num_classes >= 1, "confusion matrix needs at least one class");
    counts_.assign(static_cast<std::size_t>(k_) * k_, 0);
}

std::uint64_t ConfusionMatrix::at(int gt, int pred) const {
    PALSEG_CHECK(gt >= 0 && gt < k_ && pred >= 0 && pred < k_,
                 "confusion matrix index out of range");
    return counts_[static_cast<std::size_t>(gt) * k_ + pred];
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t t = 0;
    for (std::uint64_t c : counts_) t += c;
    return t;
}

void ConfusionMatrix::update(const nn::Tensor<std::uint8_t>& pred,
                             const nn::Tensor<std::uint8_t>& gt, int ignore_id) {
    PALSEG_CHECK(pred.same_shape(gt), "confusion update: mask shapes differ, ",
                 pred.shape_str(), " vs ", gt.shape_str());
    const std::int64_t n = pred.numel();
    for (std::int64_t i = 0; i < n; ++i) {
        const int g = gt[i];
        if (g == ignore_id) continue;
        const int p = pred[i];
        PALSEG_CHECK(g >= 0 && g < k_, "ground-truth class ", g, " out of range [0, ", k_,
                     ")");
        PALSEG_CHECK(p >= 0 && p < k_, "predicted class ", p, " out of range [0, ", k_, ")");
        ++counts_[static_cast<std::size_t>(g) * k_ + p];
    }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    PALSEG_CHECK(other.k_ == k_, "cannot merge confusion matrices of different sizes");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

namespace {
std::string percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v * 100.0);
    return buf;
}
} // namespace

std::string IouReport::to_json_text() const {
    nlohmann::json per;
    for (const auto& c : per_class) {
        per[c.name] = c.defined ? nlohmann::json(c.iou) : nlohmann::json(nullptr);
    }
    nlohmann::json j = {{"per_class", per},
                        {"mean_iou", mean_iou},
                        {"pixel_accuracy", pixel_accuracy},
                        {"num_pixels", num_pixels}};
    return j.dump(2);
}

std::string IouReport::format_percent_row() const {
    std::string row;
    for (const auto& c : per_class) {
        row += c.defined ? percent(c.iou) : std::string("n/a");
        row += " / ";
    }
    row += percent(mean_iou);
    return row;
}

IouReport iou_report(const ConfusionMatrix& cm, const data::ClassCatalog& catalog) {
    PALSEG_CHECK(catalog.num_classes() == cm.num_classes(),
                 "catalog has ", catalog.num_classes(), " classes, confusion matrix has ",
                 cm.num_classes());
    const int k = cm.num_classes();

    IouReport rep;
    rep.num_pixels = cm.total();

    std::uint64_t trace = 0;
    double iou_sum = 0.0;
    int defined = 0;
    for (int c = 0; c < k; ++c) {
        std::uint64_t row = 0, col = 0;
        for (int j = 0; j < k; ++j) {
            row += cm.at(c, j);
            col += cm.at(j, c);
        }
        const std::uint64_t tp = cm.at(c, c);
        trace += tp;
        const std::uint64_t uni = row + col - tp;

        ClassIou ci;
        ci.name = catalog.entry(c).name;
        if (uni > 0) {
            ci.iou = static_cast<double>(tp) / static_cast<double>(uni);
            ci.defined = true;
            iou_sum += ci.iou;
            ++defined;
        }
        rep.per_class.push_back(std::move(ci));
    }
    rep.mean_iou = defined > 0 ? iou_sum / defined : 0.0;
    rep.pixel_accuracy =
        rep.num_pixels > 0 ? static_cast<double>(trace) / static_cast<double>(rep.num_pixels)
                           : 0.0;
    return rep;
}

} // namespace palseg::metrics
