#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace palseg::data {

struct ClassEntry {
    int id = 0;
    std::string name;
    std::array<std::uint8_t, 3> color{0, 0, 0};
};

/// Ordered class catalog. Ids are contiguous from 0; names and colors are
/// unique. `ignore_id` marks pixels excluded from loss and metrics.
struct ClassCatalog {
    std::vector<ClassEntry> entries;
    int ignore_id = 255;
    std::array<std::uint8_t, 3> ignore_color{0, 0, 0};

    int num_classes() const { return static_cast<int>(entries.size()); }
    const ClassEntry& entry(int id) const;
    void validate() const;

    /// Three-class aerial catalog: track (green), field (red), others.
    static ClassCatalog track_field_default();
};

} // namespace palseg::data
