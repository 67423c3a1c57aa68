#pragma once

#include "ofdb/seed.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ofdb {

inline constexpr int kMinMaps = 2;
inline constexpr int kMaxMaps = 8;
inline constexpr double kDeterminantFloor = 1e-6;
inline constexpr double kDivergenceBound = 1e6;
inline constexpr std::size_t kDefaultPoints = 100'000;
inline constexpr std::size_t kDefaultBurnIn = 100;
inline constexpr int kFluctuationVariants = 25;
inline constexpr int kIdentityFluctuation = 12;
inline constexpr std::array<double, 5> kFluctuationFactors{0.8, 0.9, 1.0, 1.1, 1.2};

// x -> linear * x + translation in 2 or 3 dimensions. `linear` is row-major
// dimension x dimension; unused trailing entries stay zero.
struct AffineMap {
    int dimension = 2;
    std::array<double, 9> linear{};
    std::array<double, 3> translation{};

    double& a(int row, int col) { return linear[static_cast<std::size_t>(row * dimension + col)]; }
    double a(int row, int col) const { return linear[static_cast<std::size_t>(row * dimension + col)]; }

    double determinant() const;

    // out may alias in.
    void apply(std::span<const double> in, std::span<double> out) const;

    friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

struct IfsSystem {
    std::vector<AffineMap> maps;
    std::vector<double> probabilities;

    int dimension() const { return maps.empty() ? 0 : maps.front().dimension; }
    std::size_t size() const { return maps.size(); }

    friend bool operator==(const IfsSystem&, const IfsSystem&) = default;
};

// Throws InvalidArgumentError when a structural invariant fails: shared
// dimension in {2,3}, finite entries, positive probabilities summing to 1
// within 1e-12. `min_maps` is 2 for sampled systems; tests may relax it.
void validate(const IfsSystem& ifs, std::size_t min_maps = kMinMaps);

// p_j proportional to max(|det(linear_j)|, kDeterminantFloor).
std::vector<double> determinant_weights(std::span<const AffineMap> maps);

IfsSystem sample_ifs(int dimension, const SeedKey& seed);

struct PointCloud {
    int dimension = 2;
    std::vector<double> coords; // point-major, `dimension` values per point
    SeedKey source_seed{};
    std::size_t burn_in = 0;

    std::size_t size() const { return dimension == 0 ? 0 : coords.size() / static_cast<std::size_t>(dimension); }
    bool empty() const { return coords.empty(); }
    std::span<const double> point(std::size_t i) const {
        return {coords.data() + i * static_cast<std::size_t>(dimension), static_cast<std::size_t>(dimension)};
    }
};

// Random iteration v_{t+1} = w*(v_t) with w* drawn from the map
// probabilities. The first `burn_in` iterates are discarded and exactly
// `n_points` are returned. Raises DivergenceError when any iterate leaves
// the box |x| <= kDivergenceBound.
PointCloud chaos_game(const IfsSystem& ifs, std::size_t n_points, std::size_t burn_in,
                      std::span<const double> start, const SeedKey& seed);

// Starts from the origin.
PointCloud chaos_game(const IfsSystem& ifs, std::size_t n_points, std::size_t burn_in, const SeedKey& seed);

// Variant `5a + b` scales every linear coefficient by kFluctuationFactors[a]
// and every translation by kFluctuationFactors[b], then re-derives the
// probabilities. Variant 12 returns the input unchanged.
IfsSystem fluctuate_ifs(const IfsSystem& ifs, int variant_index);

} // namespace ofdb
