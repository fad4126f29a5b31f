#include "embedgeom/io_util.hpp"

#include "embedgeom/errors.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <cstring>
#include <sstream>
#include <system_error>

namespace embedgeom {
namespace {

std::uint32_t to_le(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
    }
    return v;
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open for writing: " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw IoError("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot rename onto " + path.string());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string encode_u32le(std::span<const std::uint32_t> values) {
    std::string out(values.size() * 4, '\0');
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::uint32_t raw = to_le(values[i]);
        std::memcpy(out.data() + i * 4, &raw, 4);
    }
    return out;
}

std::vector<std::uint32_t> decode_u32le(std::string_view bytes) {
    std::vector<std::uint32_t> out(bytes.size() / 4);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint32_t raw;
        std::memcpy(&raw, bytes.data() + i * 4, 4);
        out[i] = to_le(raw);
    }
    return out;
}

std::string encode_f32le(std::span<const float> values) {
    std::vector<std::uint32_t> raw(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) raw[i] = std::bit_cast<std::uint32_t>(values[i]);
    return encode_u32le(raw);
}

std::vector<float> decode_f32le(std::string_view bytes) {
    const auto raw = decode_u32le(bytes);
    std::vector<float> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = std::bit_cast<float>(raw[i]);
    return out;
}

}  // namespace embedgeom
