#include "palseg/data/validate.hpp"

#include <json.hpp>

#include "palseg/data/loader.hpp"

namespace palseg::data {

SampleReport validate_sample(const SegSample& sample, const ClassCatalog& catalog) {
    catalog.validate();
    SampleReport rep;
    rep.id = sample.id;
    rep.class_pixels.assign(catalog.num_classes(), 0);

    if (sample.image.ndim() == 3 &&
        (sample.image.dim(1) != sample.label.dim(0) ||
         sample.image.dim(2) != sample.label.dim(1))) {
        rep.sizes_match = false;
        rep.violations.push_back("image and label sizes differ");
    }

    std::vector<std::int64_t> bad_value_count(256, 0);
    for (std::int64_t i = 0; i < sample.label.numel(); ++i) {
        const int v = sample.label[i];
        if (v == catalog.ignore_id) {
            ++rep.ignored_pixels;
        } else if (v < catalog.num_classes()) {
            ++rep.class_pixels[static_cast<std::size_t>(v)];
        } else {
            ++bad_value_count[static_cast<std::size_t>(v)];
        }
    }
    for (int v = 0; v < 256; ++v) {
        if (bad_value_count[static_cast<std::size_t>(v)] > 0) {
            rep.violations.push_back("label value " + std::to_string(v) + " out of range (" +
                                     std::to_string(bad_value_count[static_cast<std::size_t>(v)]) +
                                     " pixels)");
        }
    }
    return rep;
}

bool DatasetReport::ok() const {
    for (const auto& s : samples) {
        if (!s.ok()) return false;
    }
    return true;
}

std::string DatasetReport::to_json_text(bool include_clean_samples) const {
    nlohmann::json out = {
        {"root", root},
        {"train_samples", train_samples},
        {"test_samples", test_samples},
        {"total_samples", train_samples + test_samples},
        {"ok", ok()},
    };
    nlohmann::json samples_json = nlohmann::json::array();
    for (const auto& s : samples) {
        if (!include_clean_samples && s.ok()) continue;
        samples_json.push_back({{"id", s.id},
                                {"ok", s.ok()},
                                {"violations", s.violations},
                                {"class_pixels", s.class_pixels},
                                {"ignored_pixels", s.ignored_pixels}});
    }
    out["samples"] = samples_json;
    return out.dump(2);
}

DatasetReport validate_dataset(const DatasetManifest& manifest) {
    DatasetReport rep;
    rep.root = manifest.root;
    for (const auto& entry : manifest.entries) {
        (entry.split == Split::train ? rep.train_samples : rep.test_samples) += 1;
        SegSample sample = load_sample(manifest, entry);
        rep.samples.push_back(validate_sample(sample, manifest.catalog));
    }
    return rep;
}

} // namespace palseg::data
