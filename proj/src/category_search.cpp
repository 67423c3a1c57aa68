#include "ofdb/category_search.hpp"

#include "ofdb/errors.hpp"
#include "ofdb/parallel.hpp"
#include "ofdb/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace ofdb {

void SearchConfig::validate() const {
    if (target_categories < 1) {
        throw InvalidArgumentError("target_categories must be >= 1");
    }
    if (resolved_max_attempts() < target_categories) {
        throw InvalidArgumentError("max_attempts must be >= target_categories");
    }
    if (!(fill_rate_threshold > 0.0 && fill_rate_threshold < 1.0)) {
        throw InvalidArgumentError("fill_rate_threshold must be in (0, 1)");
    }
    if (!(variance_threshold >= 0.0)) {
        throw InvalidArgumentError("variance_threshold must be >= 0");
    }
    if (render_probe < kMinSide) {
        throw InvalidArgumentError("render_probe must be >= 8");
    }
    if (points < 1) {
        throw InvalidArgumentError("points must be >= 1");
    }
}

double fill_rate(const PointCloud& points, int probe_side, double margin) {
    if (points.dimension != 2) {
        throw InvalidArgumentError("fill_rate expects a 2D cloud");
    }
    if (points.empty()) {
        throw EmptyCloudError("fill_rate of an empty cloud");
    }
    if (probe_side < kMinSide) {
        throw InvalidArgumentError("probe side must be >= 8");
    }
    const double total = static_cast<double>(probe_side) * static_cast<double>(probe_side);
    try {
        const DotGrid grid = normalize_points(points, probe_side, margin);
        return static_cast<double>(grid.count()) / total;
    } catch (const DegenerateExtentError&) {
        return 1.0 / total;
    }
}

PointCloud normalize_unit_cube(const PointCloud& points) {
    if (points.dimension != 3) {
        throw InvalidArgumentError("normalize_unit_cube expects a 3D cloud");
    }
    if (points.empty()) {
        throw EmptyCloudError("cannot normalize an empty cloud");
    }
    std::array<double, 3> lo;
    std::array<double, 3> hi;
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    const std::size_t n = points.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < 3; ++k) {
            lo[k] = std::min(lo[k], points.coords[3 * i + k]);
            hi[k] = std::max(hi[k], points.coords[3 * i + k]);
        }
    }
    const double extent = std::max({hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]});
    const double scale = extent > 0.0 ? 1.0 / extent : 0.0;

    PointCloud out = points;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < 3; ++k) {
            out.coords[3 * i + k] = (points.coords[3 * i + k] - lo[k]) * scale;
        }
    }
    return out;
}

std::array<double, 3> axis_variances(const PointCloud& points) {
    if (points.empty()) {
        throw EmptyCloudError("axis_variances of an empty cloud");
    }
    const PointCloud unit = normalize_unit_cube(points);
    // Welford update, one pass.
    std::array<double, 3> mean{};
    std::array<double, 3> m2{};
    const std::size_t n = unit.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double count = static_cast<double>(i + 1);
        for (std::size_t k = 0; k < 3; ++k) {
            const double x = unit.coords[3 * i + k];
            const double delta = x - mean[k];
            mean[k] += delta / count;
            m2[k] += delta * (x - mean[k]);
        }
    }
    std::array<double, 3> var{};
    for (std::size_t k = 0; k < 3; ++k) {
        var[k] = m2[k] / static_cast<double>(n);
    }
    return var;
}

PointCloud category_cloud(const IfsSystem& ifs, const SeedKey& seed, const SearchConfig& cfg) {
    return chaos_game(ifs, cfg.points, cfg.burn_in, seed.child(seed_tag::kChaosGame));
}

std::vector<double> measure_candidate(const IfsSystem& ifs, const SeedKey& seed, const SearchConfig& cfg) {
    const PointCloud cloud = category_cloud(ifs, seed, cfg);
    if (cloud.dimension == 2) {
        return {fill_rate(cloud, cfg.render_probe, cfg.margin)};
    }
    const auto var = axis_variances(cloud);
    return {var[0], var[1], var[2]};
}

bool passes_threshold(const std::vector<double>& stat, int dimension, const SearchConfig& cfg) {
    if (dimension == 2) {
        return stat.size() == 1 && stat[0] >= cfg.fill_rate_threshold;
    }
    return stat.size() == 3 &&
           std::all_of(stat.begin(), stat.end(), [&](double v) { return v >= cfg.variance_threshold; });
}

namespace {

struct Candidate {
    IfsSystem ifs;
    std::vector<double> stat;
};

std::optional<Candidate> evaluate(int dimension, const SeedKey& seed, const SearchConfig& cfg) {
    Candidate c;
    c.ifs = sample_ifs(dimension, seed);
    try {
        c.stat = measure_candidate(c.ifs, seed, cfg);
        if (!passes_threshold(c.stat, dimension, cfg)) {
            return std::nullopt;
        }
        if (cfg.require_stable_fluctuations) {
            for (int v = 0; v < kFluctuationVariants; ++v) {
                if (v != kIdentityFluctuation) {
                    (void)category_cloud(fluctuate_ifs(c.ifs, v), seed, cfg);
                }
            }
        }
    } catch (const DivergenceError&) {
        return std::nullopt;
    }
    return c;
}

} // namespace

SearchResult search_categories(const SearchConfig& cfg, int dimension, std::uint64_t master_seed) {
    cfg.validate();
    if (dimension != 2 && dimension != 3) {
        throw InvalidArgumentError("dimension must be 2 or 3");
    }
    const std::size_t target = cfg.target_categories;
    const std::size_t max_attempts = cfg.resolved_max_attempts();
    const std::size_t threads = resolve_threads(cfg.threads);
    const std::size_t chunk = std::max<std::size_t>(64, threads * 16);

    SearchResult result;
    result.records.reserve(target);
    std::size_t next = 0;
    while (result.records.size() < target && next < max_attempts) {
        const std::size_t count = std::min(chunk, max_attempts - next);
        std::vector<std::optional<Candidate>> batch(count);
        parallel_for(count, threads, [&](std::size_t i) {
            batch[i] = evaluate(dimension, SeedKey{master_seed, next + i}, cfg);
        });
        for (std::size_t i = 0; i < count && result.records.size() < target; ++i) {
            result.attempts = next + i + 1;
            if (!batch[i]) {
                continue;
            }
            CategoryRecord rec;
            rec.category_id = result.records.size();
            rec.ifs = std::move(batch[i]->ifs);
            rec.seed = SeedKey{master_seed, next + i};
            rec.acceptance_stat = std::move(batch[i]->stat);
            result.records.push_back(std::move(rec));
        }
        next += count;
    }
    if (result.records.size() < target) {
        std::ostringstream msg;
        msg << "category search exhausted " << result.attempts << " attempts with " << result.records.size() << " of "
            << target << " categories accepted (acceptance rate " << result.acceptance_rate()
            << "); loosen the thresholds or raise max_attempts";
        throw SearchExhaustedError(msg.str(), result.records.size(), result.attempts);
    }
    return result;
}

std::string format_category_file(const std::vector<CategoryRecord>& records) {
    std::string out;
    for (const auto& rec : records) {
        const int dim = rec.ifs.dimension();
        out += std::to_string(rec.category_id);
        out += ' ';
        out += std::to_string(dim);
        out += ' ';
        out += std::to_string(rec.ifs.size());
        for (const auto& map : rec.ifs.maps) {
            for (int k = 0; k < dim * dim; ++k) {
                out += ' ';
                out += format_real(map.linear[static_cast<std::size_t>(k)]);
            }
            for (int k = 0; k < dim; ++k) {
                out += ' ';
                out += format_real(map.translation[static_cast<std::size_t>(k)]);
            }
        }
        for (double p : rec.ifs.probabilities) {
            out += ' ';
            out += format_real(p);
        }
        out += ' ';
        out += std::to_string(rec.seed.master_seed);
        out += ' ';
        out += std::to_string(rec.seed.stream_index);
        for (double s : rec.acceptance_stat) {
            out += ' ';
            out += format_real(s);
        }
        out += '\n';
    }
    return out;
}

std::vector<CategoryRecord> parse_category_file(std::string_view text) {
    std::vector<CategoryRecord> records;
    std::size_t line_no = 0;
    for (std::string_view line : split_lines(text)) {
        ++line_no;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        TokenReader in(line, line_no);
        CategoryRecord rec;
        rec.category_id = in.next_uint();
        const auto dim = static_cast<int>(in.next_uint());
        if (dim != 2 && dim != 3) {
            throw FormatError("category file line " + std::to_string(line_no) + ": bad dimension");
        }
        const std::size_t n_maps = in.next_uint();
        if (n_maps < 1 || n_maps > 64) {
            throw FormatError("category file line " + std::to_string(line_no) + ": bad map count");
        }
        rec.ifs.maps.resize(n_maps);
        for (auto& map : rec.ifs.maps) {
            map.dimension = dim;
            for (int k = 0; k < dim * dim; ++k) {
                map.linear[static_cast<std::size_t>(k)] = in.next_real();
            }
            for (int k = 0; k < dim; ++k) {
                map.translation[static_cast<std::size_t>(k)] = in.next_real();
            }
        }
        rec.ifs.probabilities.resize(n_maps);
        for (double& p : rec.ifs.probabilities) {
            p = in.next_real();
        }
        rec.seed.master_seed = in.next_uint();
        rec.seed.stream_index = in.next_uint();
        const std::size_t n_stat = dim == 2 ? 1 : 3;
        for (std::size_t k = 0; k < n_stat; ++k) {
            rec.acceptance_stat.push_back(in.next_real());
        }
        in.expect_end();
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace ofdb
