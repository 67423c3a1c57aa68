#include "ofdb/raster.hpp"

#include "ofdb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ofdb {

namespace {

void check_side(int side) {
    if (side < kMinSide) {
        throw InvalidArgumentError("image side must be at least " + std::to_string(kMinSide) + " pixels");
    }
}

int to_cell(double coord, int side) {
    const double f = std::floor(coord);
    if (f <= 0.0) {
        return 0;
    }
    if (f >= static_cast<double>(side - 1)) {
        return side - 1;
    }
    return static_cast<int>(f);
}

// Writes values[k] for every in-bounds pixel of the 3x3 block centred on
// `cell`, keeping the larger value on overlap.
void stamp_max(RasterImage& img, Cell cell, const std::array<std::uint8_t, 9>& values) {
    for (int dr = 0; dr < 3; ++dr) {
        const int r = cell.row + dr - 1;
        if (r < 0 || r >= img.side) {
            continue;
        }
        for (int dc = 0; dc < 3; ++dc) {
            const int c = cell.col + dc - 1;
            if (c < 0 || c >= img.side) {
                continue;
            }
            auto& px = img.at(r, c);
            px = std::max(px, values[static_cast<std::size_t>(3 * dr + dc)]);
        }
    }
}

std::array<std::uint8_t, 9> pattern_values(PatternBits bits) {
    std::array<std::uint8_t, 9> values{};
    for (int k = 0; k < 9; ++k) {
        values[static_cast<std::size_t>(k)] = ((bits >> k) & 1u) ? kForeground : 0;
    }
    return values;
}

} // namespace

RasterImage::RasterImage(int side_px)
    : side(side_px), pixels(static_cast<std::size_t>(side_px) * static_cast<std::size_t>(side_px), 0) {}

DotGrid::DotGrid(int side_px)
    : side_(side_px), bits_(static_cast<std::size_t>(side_px) * static_cast<std::size_t>(side_px), 0) {}

void DotGrid::mark(int row, int col) {
    auto& bit = bits_[index(row, col)];
    if (bit == 0) {
        bit = 1;
        ++count_;
    }
}

std::vector<Cell> DotGrid::cells() const {
    std::vector<Cell> out;
    out.reserve(count_);
    for (int r = 0; r < side_; ++r) {
        for (int c = 0; c < side_; ++c) {
            if (occupied(r, c)) {
                out.push_back({r, c});
            }
        }
    }
    return out;
}

DotGrid normalize_points(const PointCloud& points, int side, double margin) {
    check_side(side);
    if (points.dimension != 2) {
        throw InvalidArgumentError("normalize_points expects a 2D cloud");
    }
    if (points.empty()) {
        throw EmptyCloudError("cannot rasterize an empty point cloud");
    }
    if (!(margin >= 0.0 && margin < 0.5)) {
        throw InvalidArgumentError("margin must be in [0, 0.5)");
    }

    double min_x = std::numeric_limits<double>::infinity();
    double min_y = min_x;
    double max_x = -min_x;
    double max_y = -min_x;
    const std::size_t n = points.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double x = points.coords[2 * i];
        const double y = points.coords[2 * i + 1];
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
    }
    const double width = max_x - min_x;
    const double height = max_y - min_y;
    const double extent = std::max(width, height);
    if (!(extent > 0.0)) {
        throw DegenerateExtentError("point cloud has zero extent on both axes");
    }

    const double usable = (1.0 - 2.0 * margin) * static_cast<double>(side);
    const double scale = usable / extent;
    const double offset_x = margin * side + 0.5 * (usable - width * scale);
    const double offset_y = margin * side + 0.5 * (usable - height * scale);

    DotGrid grid(side);
    for (std::size_t i = 0; i < n; ++i) {
        const int col = to_cell(offset_x + (points.coords[2 * i] - min_x) * scale, side);
        const int row = to_cell(offset_y + (points.coords[2 * i + 1] - min_y) * scale, side);
        grid.mark(row, col);
    }
    return grid;
}

RasterImage render_plain(const DotGrid& grid) {
    RasterImage img(grid.side());
    for (int r = 0; r < grid.side(); ++r) {
        for (int c = 0; c < grid.side(); ++c) {
            if (grid.occupied(r, c)) {
                img.at(r, c) = kForeground;
            }
        }
    }
    return img;
}

RasterImage render_with_pattern(const DotGrid& grid, PatternBits bits) {
    RasterImage img(grid.side());
    const auto values = pattern_values(bits);
    for (const Cell& cell : grid.cells()) {
        stamp_max(img, cell, values);
    }
    return img;
}

RasterImage render_pattern_aug(const DotGrid& grid, const SeedKey& seed) {
    RasterImage img(grid.side());
    Rng rng(seed.child(seed_tag::kPatternAug));
    for (const Cell& cell : grid.cells()) {
        const auto bits = static_cast<PatternBits>(rng.next_u64() & (kPatternCount - 1));
        stamp_max(img, cell, pattern_values(bits));
    }
    return img;
}

RasterImage render_texture_aug(const DotGrid& grid, const SeedKey& seed) {
    RasterImage img(grid.side());
    Rng rng(seed.child(seed_tag::kTextureAug));
    std::array<std::uint8_t, 9> values{};
    for (const Cell& cell : grid.cells()) {
        for (auto& v : values) {
            v = static_cast<std::uint8_t>(rng.next_u64() >> 56);
        }
        stamp_max(img, cell, values);
    }
    return img;
}

RasterImage render_fixed_patch(const DotGrid& grid, int pattern_index) {
    if (pattern_index < 0 || pattern_index >= static_cast<int>(kFixedPatches.size())) {
        throw InvalidArgumentError("fixed patch index must be in [0, 10)");
    }
    return render_with_pattern(grid, kFixedPatches[static_cast<std::size_t>(pattern_index)]);
}

RasterImage rotate90(const RasterImage& img, int quarter_turns) {
    const int turns = ((quarter_turns % 4) + 4) % 4;
    if (turns == 0) {
        return img;
    }
    const int n = img.side;
    RasterImage out(n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            int dr = r;
            int dc = c;
            for (int t = 0; t < turns; ++t) {
                const int next_r = dc;
                dc = n - 1 - dr;
                dr = next_r;
            }
            out.at(dr, dc) = img.at(r, c);
        }
    }
    return out;
}

RasterImage abs_difference(const RasterImage& a, const RasterImage& b) {
    if (a.side != b.side) {
        throw ShapeMismatchError("images differ in size");
    }
    RasterImage out(a.side);
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        out.pixels[i] = static_cast<std::uint8_t>(a.pixels[i] > b.pixels[i] ? a.pixels[i] - b.pixels[i]
                                                                           : b.pixels[i] - a.pixels[i]);
    }
    return out;
}

} // namespace ofdb
