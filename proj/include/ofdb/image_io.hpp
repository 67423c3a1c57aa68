#pragma once

#include "ofdb/raster.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ofdb {

enum class Polarity { white_on_black, black_on_white };

// 8-bit grayscale PNG, fixed zlib level and filter so equal images always
// encode to equal bytes.
std::vector<std::uint8_t> encode_png(const RasterImage& img, Polarity polarity = Polarity::white_on_black);

// Accepts 8-bit grayscale square PNGs.
RasterImage decode_png(std::span<const std::uint8_t> bytes);

// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temporary and renames, so a crash never leaves a
// truncated file under the final name. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file_atomic(const std::filesystem::path& path, const std::string& text);

} // namespace ofdb
