#pragma once

#include <string>
#include <vector>

#include "palseg/data/catalog.hpp"

namespace palseg::data {

enum class Split { train, test };

const char* to_string(Split s);
Split split_from_string(const std::string& s);

struct ManifestEntry {
    std::string id;
    std::string image_path; // relative to the dataset root
    std::string label_path;
    std::string mask_path;  // optional blind-area mask, empty if absent
    Split split = Split::train;
};

/// Dataset layout: root/manifest.json listing samples under root/images
/// and root/labels. The manifest may embed a class catalog; otherwise the
/// track/field/others default applies.
struct DatasetManifest {
    std::string root;
    std::vector<ManifestEntry> entries;
    ClassCatalog catalog;

    std::vector<ManifestEntry> split_entries(Split s) const;
    std::string resolve(const std::string& relative) const;
};

/// Loads and validates root/manifest.json: every referenced file exists,
/// ids are unique, and no id appears in both splits.
DatasetManifest load_manifest(const std::string& root);

void save_manifest(const DatasetManifest& manifest);

} // namespace palseg::data
