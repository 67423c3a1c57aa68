#include "ofdb/ifs.hpp"

#include "ofdb/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace ofdb {

double AffineMap::determinant() const {
    const auto& m = linear;
    if (dimension == 2) {
        return m[0] * m[3] - m[1] * m[2];
    }
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

void AffineMap::apply(std::span<const double> in, std::span<double> out) const {
    if (dimension == 2) {
        const double x = in[0];
        const double y = in[1];
        out[0] = linear[0] * x + linear[1] * y + translation[0];
        out[1] = linear[2] * x + linear[3] * y + translation[1];
        return;
    }
    const double x = in[0];
    const double y = in[1];
    const double z = in[2];
    out[0] = linear[0] * x + linear[1] * y + linear[2] * z + translation[0];
    out[1] = linear[3] * x + linear[4] * y + linear[5] * z + translation[1];
    out[2] = linear[6] * x + linear[7] * y + linear[8] * z + translation[2];
}

void validate(const IfsSystem& ifs, std::size_t min_maps) {
    if (ifs.maps.size() < min_maps) {
        throw InvalidArgumentError("IFS needs at least " + std::to_string(min_maps) + " maps, got " +
                                   std::to_string(ifs.maps.size()));
    }
    if (ifs.probabilities.size() != ifs.maps.size()) {
        throw InvalidArgumentError("IFS probability count does not match map count");
    }
    const int dim = ifs.dimension();
    if (dim != 2 && dim != 3) {
        throw InvalidArgumentError("IFS dimension must be 2 or 3");
    }
    for (const auto& map : ifs.maps) {
        if (map.dimension != dim) {
            throw InvalidArgumentError("IFS maps disagree on dimension");
        }
        for (double v : map.linear) {
            if (!std::isfinite(v)) {
                throw InvalidArgumentError("IFS linear coefficient is not finite");
            }
        }
        for (double v : map.translation) {
            if (!std::isfinite(v)) {
                throw InvalidArgumentError("IFS translation is not finite");
            }
        }
    }
    double total = 0.0;
    for (double p : ifs.probabilities) {
        if (!(p > 0.0) || !std::isfinite(p)) {
            throw InvalidArgumentError("IFS probabilities must be positive");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw InvalidArgumentError("IFS probabilities must sum to 1");
    }
}

std::vector<double> determinant_weights(std::span<const AffineMap> maps) {
    std::vector<double> weights;
    weights.reserve(maps.size());
    for (const auto& map : maps) {
        weights.push_back(std::max(std::abs(map.determinant()), kDeterminantFloor));
    }
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double& w : weights) {
        w /= total;
    }
    return weights;
}

IfsSystem sample_ifs(int dimension, const SeedKey& seed) {
    if (dimension != 2 && dimension != 3) {
        throw InvalidArgumentError("dimension must be 2 or 3");
    }
    Rng rng(seed);
    const auto n_maps = static_cast<int>(kMinMaps + rng.below(kMaxMaps - kMinMaps + 1));

    IfsSystem ifs;
    ifs.maps.resize(static_cast<std::size_t>(n_maps));
    // Redraw if every determinant sits under the floor: such a system has
    // no area/volume and only produces a degenerate attractor.
    for (;;) {
        bool any_volume = false;
        for (auto& map : ifs.maps) {
            map = AffineMap{};
            map.dimension = dimension;
            for (int k = 0; k < dimension * dimension; ++k) {
                map.linear[static_cast<std::size_t>(k)] = rng.uniform(-1.0, 1.0);
            }
            for (int k = 0; k < dimension; ++k) {
                map.translation[static_cast<std::size_t>(k)] = rng.uniform(-1.0, 1.0);
            }
            any_volume = any_volume || std::abs(map.determinant()) >= kDeterminantFloor;
        }
        if (any_volume) {
            break;
        }
    }
    ifs.probabilities = determinant_weights(ifs.maps);
    return ifs;
}

namespace {

template <int Dim>
void run_orbit(const IfsSystem& ifs, const std::vector<double>& cumulative, std::span<const double> start,
               std::size_t burn_in, Rng& rng, std::vector<double>& out) {
    std::array<double, Dim> v{};
    std::copy(start.begin(), start.end(), v.begin());
    const std::size_t n_points = out.size() / Dim;
    const std::size_t total = burn_in + n_points;
    const std::size_t n_maps = ifs.maps.size();
    double* dst = out.data();
    for (std::size_t t = 0; t < total; ++t) {
        const double u = rng.uniform01();
        // Branch-free categorical draw; map choices are unpredictable.
        std::size_t j = 0;
        for (std::size_t k = 0; k + 1 < n_maps; ++k) {
            j += static_cast<std::size_t>(u >= cumulative[k]);
        }
        const auto& m = ifs.maps[j].linear;
        const auto& b = ifs.maps[j].translation;
        std::array<double, Dim> next;
        bool bounded = true;
        for (int r = 0; r < Dim; ++r) {
            double s = b[static_cast<std::size_t>(r)];
            for (int c = 0; c < Dim; ++c) {
                s += m[static_cast<std::size_t>(r * Dim + c)] * v[static_cast<std::size_t>(c)];
            }
            next[static_cast<std::size_t>(r)] = s;
            // Negated test also catches NaN.
            bounded = bounded && (std::abs(s) <= kDivergenceBound);
        }
        if (!bounded) {
            throw DivergenceError("chaos game diverged at iteration " + std::to_string(t));
        }
        v = next;
        if (t >= burn_in) {
            for (int k = 0; k < Dim; ++k) {
                *dst++ = v[static_cast<std::size_t>(k)];
            }
        }
    }
}

} // namespace

PointCloud chaos_game(const IfsSystem& ifs, std::size_t n_points, std::size_t burn_in,
                      std::span<const double> start, const SeedKey& seed) {
    validate(ifs, 1);
    const int dim = ifs.dimension();
    if (n_points == 0) {
        throw InvalidArgumentError("chaos_game needs n_points >= 1");
    }
    if (start.size() != static_cast<std::size_t>(dim)) {
        throw InvalidArgumentError("start point dimension does not match IFS");
    }
    for (double v : start) {
        if (!std::isfinite(v)) {
            throw InvalidArgumentError("start point is not finite");
        }
    }

    // Cumulative table for categorical draws; the last bound is pinned to 1
    // so rounding in the prefix sums can never leave a gap.
    std::vector<double> cumulative(ifs.size());
    std::partial_sum(ifs.probabilities.begin(), ifs.probabilities.end(), cumulative.begin());
    cumulative.back() = 1.0;

    PointCloud cloud;
    cloud.dimension = dim;
    cloud.source_seed = seed;
    cloud.burn_in = burn_in;
    cloud.coords.resize(n_points * static_cast<std::size_t>(dim));

    Rng rng(seed);
    if (dim == 2) {
        run_orbit<2>(ifs, cumulative, start, burn_in, rng, cloud.coords);
    } else {
        run_orbit<3>(ifs, cumulative, start, burn_in, rng, cloud.coords);
    }
    return cloud;
}

PointCloud chaos_game(const IfsSystem& ifs, std::size_t n_points, std::size_t burn_in, const SeedKey& seed) {
    const std::array<double, 3> origin{};
    return chaos_game(ifs, n_points, burn_in, std::span<const double>(origin.data(), static_cast<std::size_t>(ifs.dimension())),
                      seed);
}

IfsSystem fluctuate_ifs(const IfsSystem& ifs, int variant_index) {
    if (variant_index < 0 || variant_index >= kFluctuationVariants) {
        throw InvalidArgumentError("fluctuation variant must be in [0, 25)");
    }
    if (variant_index == kIdentityFluctuation) {
        return ifs;
    }
    const double linear_factor = kFluctuationFactors[static_cast<std::size_t>(variant_index / 5)];
    const double translation_factor = kFluctuationFactors[static_cast<std::size_t>(variant_index % 5)];

    IfsSystem out = ifs;
    for (auto& map : out.maps) {
        for (int k = 0; k < map.dimension * map.dimension; ++k) {
            map.linear[static_cast<std::size_t>(k)] *= linear_factor;
        }
        for (int k = 0; k < map.dimension; ++k) {
            map.translation[static_cast<std::size_t>(k)] *= translation_factor;
        }
    }
    out.probabilities = determinant_weights(out.maps);
    return out;
}

} // namespace ofdb
