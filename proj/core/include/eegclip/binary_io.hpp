#pragma once

// Shared framing for the binary containers: 4-byte magic, u32 schema version,
// u64 JSON header length, JSON header, then a raw little-endian payload.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace eegclip::binary {

static_assert(std::endian::native == std::endian::little,
              "container payloads are written as raw little-endian bytes");

struct Header {
  std::uint32_t version = 0;
  nlohmann::json json;
};

void write_header(std::ostream& out, std::string_view magic, std::uint32_t version,
                  const nlohmann::json& header);

/// Reads and validates the framing; throws Error(kMalformedHeader) on a bad
/// magic or unparsable JSON and Error(kTruncatedPayload) on short reads.
Header read_header(std::istream& in, std::string_view magic, const std::string& what);

template <typename T>
void write_array(std::ostream& out, std::span<const T> values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size_bytes()));
}

/// Returns false on a short read.
template <typename T>
bool read_array(std::istream& in, std::span<T> values) {
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  return static_cast<std::size_t>(in.gcount()) == values.size_bytes();
}

/// Serialises to bytes in memory and writes the whole file at once.
void write_file(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace eegclip::binary
