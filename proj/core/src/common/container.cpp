#include "palseg/common/container.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "palseg/common/check.hpp"
#include "palseg/common/hash.hpp"

namespace palseg {

namespace {
constexpr char kMagic[8] = {'P', 'S', 'E', 'G', 'B', 'I', 'N', '1'};

void write_u64(std::ofstream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::ifstream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}
} // namespace

void write_blob_file(const std::string& path, const std::string& header_json,
                     const void* payload, std::size_t payload_size) {
    nlohmann::json header = nlohmann::json::parse(header_json);
    header["payload_size"] = payload_size;
    header["payload_fnv1a"] = hex64(fnv1a64(payload, payload_size));
    const std::string text = header.dump();

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    PALSEG_CHECK(os, "cannot open for writing: ", path);
    os.write(kMagic, 8);
    write_u64(os, text.size());
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (payload_size > 0) {
        os.write(static_cast<const char*>(payload), static_cast<std::streamsize>(payload_size));
    }
    PALSEG_CHECK(os.good(), "write failed: ", path);
}

BlobFile read_blob_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    PALSEG_CHECK(is, "cannot open for reading: ", path);

    char magic[8];
    is.read(magic, 8);
    PALSEG_CHECK(is.good() && std::memcmp(magic, kMagic, 8) == 0,
                 "not a palseg container file: ", path);

    const std::uint64_t header_len = read_u64(is);
    PALSEG_CHECK(is.good() && header_len < (1ULL << 24), "corrupt container header: ", path);
    std::string text(header_len, '\0');
    is.read(text.data(), static_cast<std::streamsize>(header_len));
    PALSEG_CHECK(is.good(), "truncated container header: ", path);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        PALSEG_FAIL("invalid container header JSON in ", path, ": ", e.what());
    }
    PALSEG_CHECK(header.contains("payload_size") && header.contains("payload_fnv1a"),
                 "container header missing payload fields: ", path);

    const auto payload_size = header["payload_size"].get<std::uint64_t>();
    BlobFile out;
    out.header_json = text;
    out.payload.resize(payload_size);
    if (payload_size > 0) {
        is.read(reinterpret_cast<char*>(out.payload.data()),
                static_cast<std::streamsize>(payload_size));
    }
    PALSEG_CHECK(is.gcount() == static_cast<std::streamsize>(payload_size),
                 "integrity error: ", path, " is truncated (expected ", payload_size,
                 " payload bytes)");

    const std::string sum = hex64(fnv1a64(out.payload.data(), out.payload.size()));
    PALSEG_CHECK(sum == header["payload_fnv1a"].get<std::string>(),
                 "integrity error: payload checksum mismatch in ", path);
    return out;
}

} // namespace palseg
