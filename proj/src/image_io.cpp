#include "ofdb/image_io.hpp"

#include "ofdb/errors.hpp"

#include <openssl/evp.h>
#include <png.h>
#include <zlib.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

namespace ofdb {

namespace {

void png_append(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

[[noreturn]] void png_error_throw(png_structp, png_const_charp msg) {
    throw FormatError(std::string("png: ") + msg);
}

void png_warning_ignore(png_structp, png_const_charp) {}

struct ReadCursor {
    std::span<const std::uint8_t> bytes;
    std::size_t offset = 0;
};

void png_consume(png_structp png, png_bytep data, png_size_t length) {
    auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
    if (cur->offset + length > cur->bytes.size()) {
        png_error(png, "truncated stream");
    }
    std::memcpy(data, cur->bytes.data() + cur->offset, length);
    cur->offset += length;
}

} // namespace

std::vector<std::uint8_t> encode_png(const RasterImage& img, Polarity polarity) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_throw, png_warning_ignore);
    if (png == nullptr) {
        throw IoError("png: cannot allocate write struct");
    }
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp& png;
        png_infop& info;
        ~Guard() { png_destroy_write_struct(&png, &info); }
    } guard{png, info};
    if (info == nullptr) {
        throw IoError("png: cannot allocate info struct");
    }

    std::vector<std::uint8_t> out;
    out.reserve(img.pixels.size() / 4 + 128);
    png_set_write_fn(png, &out, png_append, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.side), static_cast<png_uint_32>(img.side), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_set_compression_strategy(png, Z_DEFAULT_STRATEGY);
    png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_SUB);
    png_write_info(png, info);

    std::vector<std::uint8_t> row(static_cast<std::size_t>(img.side));
    for (int r = 0; r < img.side; ++r) {
        const std::uint8_t* src = img.pixels.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(img.side);
        if (polarity == Polarity::white_on_black) {
            std::copy(src, src + img.side, row.begin());
        } else {
            for (int c = 0; c < img.side; ++c) {
                row[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(255 - src[c]);
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    return out;
}

RasterImage decode_png(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
        throw FormatError("png: bad signature");
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_throw, png_warning_ignore);
    if (png == nullptr) {
        throw IoError("png: cannot allocate read struct");
    }
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp& png;
        png_infop& info;
        ~Guard() { png_destroy_read_struct(&png, &info, nullptr); }
    } guard{png, info};
    if (info == nullptr) {
        throw IoError("png: cannot allocate info struct");
    }

    ReadCursor cursor{bytes, 0};
    png_set_read_fn(png, &cursor, png_consume);
    png_read_info(png, info);
    const auto width = png_get_image_width(png, info);
    const auto height = png_get_image_height(png, info);
    if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY || png_get_bit_depth(png, info) != 8) {
        throw FormatError("png: expected 8-bit grayscale");
    }
    if (width != height || width < static_cast<png_uint_32>(kMinSide) || width > 65536) {
        throw FormatError("png: expected a square image");
    }
    RasterImage img(static_cast<int>(width));
    for (png_uint_32 r = 0; r < height; ++r) {
        png_read_row(png, img.pixels.data() + static_cast<std::size_t>(r) * width, nullptr);
    }
    png_read_end(png, nullptr);
    return img;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0xF];
    }
    return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::filesystem::path tmp = path;
    tmp += ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot create " + tmp.string());
        }
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw IoError("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot rename into " + path.string());
    }
}

void write_text_file_atomic(const std::filesystem::path& path, const std::string& text) {
    write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

} // namespace ofdb
