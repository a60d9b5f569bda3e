#include "palseg/data/catalog.hpp"

#include <set>

#include "palseg/common/check.hpp"

namespace palseg::data {

const ClassEntry& ClassCatalog::entry(int id) const {
    PALSEG_CHECK(id >= 0 && id < num_classes(), "class id ", id, " out of range [0, ",
                 num_classes(), ")");
    return entries[static_cast<std::size_t>(id)];
}

void ClassCatalog::validate() const {
    PALSEG_CHECK(!entries.empty(), "class catalog is empty");
    std::set<std::string> names;
    std::set<std::array<std::uint8_t, 3>> colors;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const ClassEntry& e = entries[i];
        PALSEG_CHECK(e.id == static_cast<int>(i),
                     "class ids must be contiguous from 0; entry ", i, " has id ", e.id);
        PALSEG_CHECK(names.insert(e.name).second, "duplicate class name '", e.name, "'");
        PALSEG_CHECK(colors.insert(e.color).second, "duplicate class color on '", e.name, "'");
    }
    PALSEG_CHECK(ignore_id >= num_classes(), "ignore_id ", ignore_id,
                 " collides with a class id");
    PALSEG_CHECK(!colors.contains(ignore_color), "ignore color collides with a class color");
}

ClassCatalog ClassCatalog::track_field_default() {
    ClassCatalog c;
    c.entries = {
        {0, "track", {0, 255, 0}},
        {1, "field", {255, 0, 0}},
        {2, "others", {128, 128, 128}},
    };
    c.ignore_id = 255;
    c.ignore_color = {0, 0, 0};
    return c;
}

} // namespace palseg::data
