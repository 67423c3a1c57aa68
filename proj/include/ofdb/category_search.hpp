#pragma once

#include "ofdb/ifs.hpp"
#include "ofdb/raster.hpp"
#include "ofdb/seed.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ofdb {

inline constexpr double kDefaultFillRateThreshold = 0.2;
inline constexpr double kDefaultVarianceThreshold = 0.005;
inline constexpr int kDefaultProbeSide = 256;
inline constexpr std::size_t kDefaultAttemptsPerCategory = 50;

struct SearchConfig {
    std::size_t target_categories = 1000;
    double fill_rate_threshold = kDefaultFillRateThreshold; // 2D
    double variance_threshold = kDefaultVarianceThreshold;  // 3D, per axis
    std::size_t max_attempts = 0;                           // 0 -> 50 * target_categories
    int render_probe = kDefaultProbeSide;
    double margin = kDefaultMargin;
    std::size_t points = kDefaultPoints;
    std::size_t burn_in = kDefaultBurnIn;
    // Also reject candidates for which any x25 fluctuation variant diverges.
    // Needed when every variant will be rendered.
    bool require_stable_fluctuations = false;
    std::size_t threads = 0;

    std::size_t resolved_max_attempts() const {
        return max_attempts != 0 ? max_attempts : kDefaultAttemptsPerCategory * target_categories;
    }
    void validate() const;
};

struct CategoryRecord {
    std::size_t category_id = 0;
    IfsSystem ifs;
    SeedKey seed;                        // sample_ifs key; the chaos game uses seed.child(kChaosGame)
    std::vector<double> acceptance_stat; // {fill rate} in 2D, per-axis variances in 3D

    SeedKey chaos_seed() const { return seed.child(seed_tag::kChaosGame); }

    friend bool operator==(const CategoryRecord&, const CategoryRecord&) = default;
};

struct SearchResult {
    std::vector<CategoryRecord> records;
    std::size_t attempts = 0;

    double acceptance_rate() const {
        return attempts == 0 ? 0.0 : static_cast<double>(records.size()) / static_cast<double>(attempts);
    }
};

// Occupied probe pixels / probe_side^2 after the production normalization.
// A cloud whose points all coincide occupies exactly one pixel.
double fill_rate(const PointCloud& points, int probe_side, double margin = kDefaultMargin);

// Isotropic scaling of the bounding box into [0,1]^3 (longest axis spans
// [0,1]). A single-point cloud maps to the origin.
PointCloud normalize_unit_cube(const PointCloud& points);

// Population variance per axis of the unit-cube-normalized cloud.
std::array<double, 3> axis_variances(const PointCloud& points);

// Probe cloud for a category, regenerated from its stored seed.
PointCloud category_cloud(const IfsSystem& ifs, const SeedKey& seed, const SearchConfig& cfg);

// Recomputes the acceptance statistic of a candidate exactly as the search
// does.
std::vector<double> measure_candidate(const IfsSystem& ifs, const SeedKey& seed, const SearchConfig& cfg);

bool passes_threshold(const std::vector<double>& stat, int dimension, const SearchConfig& cfg);

// Candidates are drawn from streams 0, 1, 2, ... of master_seed and accepted
// in stream order, so the result is independent of the worker count and the
// C-category list is a prefix of any longer list from the same seed.
// Throws SearchExhaustedError when max_attempts run out.
SearchResult search_categories(const SearchConfig& cfg, int dimension, std::uint64_t master_seed);

// One record per line, space separated:
//   category_id dimension M <per map: linear d*d, translation d> <p_1..p_M>
//   master_seed stream_index <acceptance stat: 1 value (2D) or 3 (3D)>
// Reals use 17 significant digits so parsing restores the exact doubles.
std::string format_category_file(const std::vector<CategoryRecord>& records);
std::vector<CategoryRecord> parse_category_file(std::string_view text);

} // namespace ofdb
