#pragma once

#include <string>

#include "palseg/common/image.hpp"

namespace palseg {

/// Reads an 8-bit PNG. Palette images are expanded to RGB, 16-bit is
/// stripped to 8, and an alpha channel is dropped.
ImageU8 read_png(const std::string& path);

/// Writes gray (1 channel) or RGB (3 channel) 8-bit PNG.
void write_png(const std::string& path, const ImageU8& img);

} // namespace palseg
