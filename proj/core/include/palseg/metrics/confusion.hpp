#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "palseg/data/catalog.hpp"
#include "palseg/nn/tensor.hpp"

namespace palseg::metrics {

/// K x K count table, rows ground truth, columns prediction. Everything
/// else (IoU, accuracy) derives from it, so accumulation order cannot
/// matter.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int num_classes);

    int num_classes() const { return k_; }
    std::uint64_t at(int gt, int pred) const;
    std::uint64_t total() const;

    /// Adds one mask pair; ground-truth pixels equal to `ignore_id` are
    /// skipped, out-of-range values raise.
    void update(const nn::Tensor<std::uint8_t>& pred, const nn::Tensor<std::uint8_t>& gt,
                int ignore_id);

    /// Element-wise sum, for parallel evaluation workers.
    void merge(const ConfusionMatrix& other);

private:
    int k_;
    std::vector<std::uint64_t> counts_;
};

struct ClassIou {
    std::string name;
    double iou = 0.0;   // meaningful only when defined
    bool defined = false; // false when the class has an empty union
};

struct IouReport {
    std::vector<ClassIou> per_class;
    double mean_iou = 0.0;      // mean over defined classes
    double pixel_accuracy = 0.0;
    std::uint64_t num_pixels = 0;

    std::string to_json_text() const;
    /// Percent formatting matching the usual benchmark tables, e.g.
    /// "67.67 / 99.06 / 92.16 / 86.30".
    std::string format_percent_row() const;
};

/// IoU_c = cm[c][c] / (row_c + col_c - cm[c][c]); classes with an empty
/// union are flagged undefined and excluded from the mean.
IouReport iou_report(const ConfusionMatrix& cm, const data::ClassCatalog& catalog);

} // namespace palseg::metrics
