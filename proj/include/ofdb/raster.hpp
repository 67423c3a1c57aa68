#pragma once

#include "ofdb/ifs.hpp"
#include "ofdb/seed.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace ofdb {

inline constexpr int kMinSide = 8;
inline constexpr int kDefaultSide = 256;
inline constexpr double kDefaultMargin = 0.05;
inline constexpr std::uint8_t kForeground = 255;

struct Cell {
    int row = 0;
    int col = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
};

// Square 8-bit single-channel image, row-major, 0 = background.
struct RasterImage {
    int side = 0;
    std::vector<std::uint8_t> pixels;

    RasterImage() = default;
    explicit RasterImage(int side_px);

    std::uint8_t& at(int row, int col) { return pixels[index(row, col)]; }
    std::uint8_t at(int row, int col) const { return pixels[index(row, col)]; }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;

private:
    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(side) + static_cast<std::size_t>(col);
    }
};

// Binary occupancy: a cell is set when at least one point landed in it.
class DotGrid {
public:
    DotGrid() = default;
    explicit DotGrid(int side_px);

    int side() const { return side_; }
    bool occupied(int row, int col) const { return bits_[index(row, col)] != 0; }
    void mark(int row, int col);
    std::size_t count() const { return count_; }

    // Row-major order; this is the order augmentation draws are consumed in.
    std::vector<Cell> cells() const;

    friend bool operator==(const DotGrid&, const DotGrid&) = default;

private:
    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(side_) + static_cast<std::size_t>(col);
    }

    int side_ = 0;
    std::vector<std::uint8_t> bits_;
    std::size_t count_ = 0;
};

// 3x3 binary pattern; bit (3*dr + dc) covers offset (dr-1, dc-1).
using PatternBits = std::uint16_t;
inline constexpr int kPatternCount = 512;

inline constexpr bool pattern_bit(PatternBits bits, int dr, int dc) {
    return ((bits >> (3 * dr + dc)) & 1u) != 0;
}

// Fixed patch table used for the x10 instance expansion. Entry 0 is the
// single centre dot, so it reproduces the plain render.
//
//   0 centre dot   1 all ones     2 plus          3 X
//   4 horiz. bar   5 vert. bar    6 main diag.    7 anti-diag.
//   8 ring         9 corners
inline constexpr std::array<PatternBits, 10> kFixedPatches{
    0b000'010'000, 0b111'111'111, 0b010'111'010, 0b101'010'101, 0b000'111'000,
    0b010'010'010, 0b100'010'001, 0b001'010'100, 0b111'101'111, 0b101'000'101,
};

// Isotropically fits the cloud's bounding box, centred, into the
// (1 - 2*margin)*side square and marks each point's cell. x maps to column,
// y to row. Throws DegenerateExtentError if both extents are zero.
DotGrid normalize_points(const PointCloud& points, int side, double margin = kDefaultMargin);

RasterImage render_plain(const DotGrid& grid);

// Every occupied cell gets an independent uniform draw from all 512 binary
// patterns, stamped centred and max-composited; stamps are clipped at the
// border.
RasterImage render_pattern_aug(const DotGrid& grid, const SeedKey& seed);

// As above with nine independent uniform intensities in [0, 255].
RasterImage render_texture_aug(const DotGrid& grid, const SeedKey& seed);

RasterImage render_fixed_patch(const DotGrid& grid, int pattern_index);

// Stamps one pattern on every occupied cell.
RasterImage render_with_pattern(const DotGrid& grid, PatternBits bits);

// Clockwise; each quarter turn maps (r, c) to (c, side - 1 - r).
RasterImage rotate90(const RasterImage& img, int quarter_turns);

// Per-pixel |a - b|.
RasterImage abs_difference(const RasterImage& a, const RasterImage& b);

} // namespace ofdb
