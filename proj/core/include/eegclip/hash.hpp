#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>

namespace eegclip {

/// 64-bit FNV-1a. Used where a cheap, stable seed derivation is enough.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// Derives a child seed from a parent seed and a path of indices.
std::uint64_t seed_mix(std::uint64_t seed, std::initializer_list<std::uint64_t> parts);

/// Lower-case hex SHA-1 of `bytes`.
std::string sha1_hex(std::string_view bytes);

/// Git blob object id: SHA-1 over "blob <size>\0" followed by the content.
std::string git_blob_hash(std::string_view content);
std::string git_blob_hash_file(const std::filesystem::path& path);

/// SHA-1 over the raw little-endian bytes of a double array.
std::string hash_doubles(std::span<const double> values);

}  // namespace eegclip
