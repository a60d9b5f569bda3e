#pragma once

#include "palseg/data/manifest.hpp"
#include "palseg/data/sample.hpp"

namespace palseg::data {

/// Report-based sample validation; never throws for content problems.
struct SampleReport {
    std::string id;
    bool sizes_match = true;
    std::vector<std::string> violations;       // out-of-range labels etc.
    std::vector<std::int64_t> class_pixels;    // one count per class id
    std::int64_t ignored_pixels = 0;
    bool ok() const { return sizes_match && violations.empty(); }
};

SampleReport validate_sample(const SegSample& sample, const ClassCatalog& catalog);

/// Whole-dataset validation used by the CLI; aggregates per-sample
/// reports and split statistics.
struct DatasetReport {
    std::string root;
    std::int64_t train_samples = 0;
    std::int64_t test_samples = 0;
    std::vector<SampleReport> samples;
    bool ok() const;
    std::string to_json_text(bool include_clean_samples = false) const;
};

DatasetReport validate_dataset(const DatasetManifest& manifest);

} // namespace palseg::data
