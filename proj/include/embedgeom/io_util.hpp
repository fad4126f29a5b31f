#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace embedgeom {

/// Writes `content` to a sibling temp file and renames it over `path`.
/// Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Throws IoError when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `value`.
/// Non-finite values render as "nan", "inf" or "-inf".
std::string format_double(double value);

/// Little-endian packing of 32-bit values, independent of host byte order.
std::string encode_f32le(std::span<const float> values);
std::vector<float> decode_f32le(std::string_view bytes);
std::string encode_u32le(std::span<const std::uint32_t> values);
std::vector<std::uint32_t> decode_u32le(std::string_view bytes);

}  // namespace embedgeom
