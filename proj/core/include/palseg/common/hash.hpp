#pragma once

#include <cstdint>
#include <string>

namespace palseg {

/// FNV-1a 64-bit over a byte range.
std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::uint64_t fnv1a64(const std::string& s);

/// Lower-case hex rendering used for config hashes and checksums.
std::string hex64(std::uint64_t v);

} // namespace palseg
