#include "palseg/data/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "palseg/common/check.hpp"

namespace fs = std::filesystem;

namespace palseg::data {

const char* to_string(Split s) { return s == Split::train ? "train" : "test"; }

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    PALSEG_FAIL("unknown split '", s, "' (expected train or test)");
}

std::vector<ManifestEntry> DatasetManifest::split_entries(Split s) const {
    std::vector<ManifestEntry> out;
    for (const auto& e : entries) {
        if (e.split == s) out.push_back(e);
    }
    return out;
}

std::string DatasetManifest::resolve(const std::string& relative) const {
    return (fs::path(root) / relative).string();
}

namespace {

ClassCatalog catalog_from_json(const nlohmann::json& j) {
    ClassCatalog c;
    c.entries.clear();
    for (const auto& e : j) {
        ClassEntry entry;
        entry.id = e.at("id").get<int>();
        entry.name = e.at("name").get<std::string>();
        const auto color = e.at("color").get<std::vector<int>>();
        PALSEG_CHECK(color.size() == 3, "class color must have 3 components");
        for (int i = 0; i < 3; ++i) entry.color[i] = static_cast<std::uint8_t>(color[i]);
        c.entries.push_back(std::move(entry));
    }
    return c;
}

nlohmann::json catalog_to_json(const ClassCatalog& c) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : c.entries) {
        out.push_back({{"id", e.id},
                       {"name", e.name},
                       {"color", {e.color[0], e.color[1], e.color[2]}}});
    }
    return out;
}

} // namespace

DatasetManifest load_manifest(const std::string& root) {
    const fs::path manifest_path = fs::path(root) / "manifest.json";
    PALSEG_CHECK(fs::exists(manifest_path), "no manifest.json under ", root);

    std::ifstream is(manifest_path);
    PALSEG_CHECK(is, "cannot open ", manifest_path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        PALSEG_FAIL(manifest_path.string(), ": JSON parse error: ", e.what());
    }

    DatasetManifest m;
    m.root = root;
    m.catalog = ClassCatalog::track_field_default();
    if (j.contains("classes")) m.catalog = catalog_from_json(j.at("classes"));
    if (j.contains("ignore_id")) m.catalog.ignore_id = j.at("ignore_id").get<int>();
    m.catalog.validate();

    PALSEG_CHECK(j.contains("samples"), manifest_path.string(), ": missing 'samples' array");
    std::set<std::string> seen_ids;
    for (const auto& s : j.at("samples")) {
        ManifestEntry e;
        e.id = s.at("id").get<std::string>();
        e.image_path = s.at("image").get<std::string>();
        e.label_path = s.at("label").get<std::string>();
        e.mask_path = s.value("mask", "");
        e.split = split_from_string(s.at("split").get<std::string>());

        PALSEG_CHECK(seen_ids.insert(e.id).second, "duplicate sample id '", e.id,
                     "' in manifest (an id may appear in only one split)");
        for (const std::string* rel : {&e.image_path, &e.label_path, &e.mask_path}) {
            if (rel->empty()) continue;
            const fs::path p = fs::path(root) / *rel;
            PALSEG_CHECK(fs::exists(p), "sample '", e.id, "' references missing file ",
                         p.string());
        }
        m.entries.push_back(std::move(e));
    }
    PALSEG_CHECK(!m.entries.empty(), manifest_path.string(), ": empty sample list");
    return m;
}

void save_manifest(const DatasetManifest& manifest) {
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& e : manifest.entries) {
        nlohmann::json s = {{"id", e.id},
                            {"image", e.image_path},
                            {"label", e.label_path},
                            {"split", to_string(e.split)}};
        if (!e.mask_path.empty()) s["mask"] = e.mask_path;
        samples.push_back(std::move(s));
    }
    nlohmann::json j = {{"classes", catalog_to_json(manifest.catalog)},
                        {"ignore_id", manifest.catalog.ignore_id},
                        {"samples", samples}};

    const fs::path path = fs::path(manifest.root) / "manifest.json";
    std::ofstream os(path, std::ios::trunc);
    PALSEG_CHECK(os, "cannot write ", path.string());
    os << j.dump(2) << "\n";
}

} // namespace palseg::data
