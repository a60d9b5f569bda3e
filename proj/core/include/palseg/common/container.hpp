#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace palseg {

/// On-disk container: 8-byte magic, u64 header length, JSON header text,
/// then a flat binary payload. The writer records payload size and an
/// FNV-1a checksum in the header; the reader verifies both, so truncated
/// or corrupted files fail loudly.
struct BlobFile {
    std::string header_json;          // user header, without the checksum fields
    std::vector<std::uint8_t> payload;
};

void write_blob_file(const std::string& path, const std::string& header_json,
                     const void* payload, std::size_t payload_size);

/// Returns the full header (including checksum fields) and the payload.
BlobFile read_blob_file(const std::string& path);

} // namespace palseg
