// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero
// when any gating criterion fails. Pass criterion numbers as arguments to run
// a subset, e.g. `ofdb_acceptance 3 4 7`.

#include "oracles.hpp"

#include "ofdb/camera.hpp"
#include "ofdb/category_search.hpp"
#include "ofdb/dataset.hpp"
#include "ofdb/errors.hpp"
#include "ofdb/image_io.hpp"
#include "ofdb/parallel.hpp"
#include "ofdb/raster.hpp"
#include "ofdb/train.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

using namespace ofdb;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* title;
    bool gating;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_forge(const std::string& args) {
    const std::string cmd = "'" OFDB_FORGE_PATH "' " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t count_pngs(const fs::path& root) {
    std::size_t n = 0;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        n += e.is_regular_file() && e.path().extension() == ".png" ? 1 : 0;
    }
    return n;
}

std::string manifest_sans_version(DatasetManifest m) {
    m.tool_version.clear();
    return manifest_to_string(m);
}

// Both trees hold the same manifest (minus tool_version) and every image's
// on-disk checksum matches in both.
bool same_build(const fs::path& a, const fs::path& b, std::string& why) {
    const DatasetManifest ma = load_manifest(a / kManifestFileName);
    const DatasetManifest mb = load_manifest(b / kManifestFileName);
    if (manifest_sans_version(ma) != manifest_sans_version(mb)) {
        why = "manifests differ";
        return false;
    }
    for (const auto& r : ma.records) {
        if (sha256_hex(read_file(a / r.path)) != sha256_hex(read_file(b / r.path))) {
            why = "image bytes differ at " + r.path;
            return false;
        }
    }
    return true;
}

class Suite {
public:
    Suite() : scratch_("acceptance") {}

    // 2D-OFDB-1k with default settings, shared by criteria 1, 2 and 8.
    const fs::path& ofdb1k() {
        if (!ofdb1k_) {
            const fs::path out = scratch_.path() / "ofdb1k";
            const auto t0 = std::chrono::steady_clock::now();
            const int code = run_forge("generate --dim 2 --categories 1000 --seed 7 --out '" + out.string() + "'");
            ofdb1k_seconds_ = seconds_since(t0);
            if (code != 0) {
                throw std::runtime_error("generate 1k exited with " + std::to_string(code));
            }
            ofdb1k_ = out;
        }
        return *ofdb1k_;
    }

    Outcome count_reproduction() {
        const fs::path& k1 = ofdb1k();
        const std::size_t n1 = count_pngs(k1);
        const fs::path k21 = scratch_.path() / "ofdb21k";
        const auto t0 = std::chrono::steady_clock::now();
        const int code = run_forge("generate --dim 2 --categories 21000 --seed 7 --out '" + k21.string() + "'");
        const double t21 = seconds_since(t0);
        const std::size_t n21 = code == 0 ? count_pngs(k21) : 0;
        const std::size_t r21 = code == 0 ? load_manifest(k21 / kManifestFileName).records.size() : 0;
        fs::remove_all(k21);
        const bool fast = ofdb1k_seconds_ < 600.0;
        return {n1 == 1000 && n21 == 21000 && r21 == 21000 && fast,
                fmt("1k: %zu images in %.1f s on %zu thread(s) (target < 600 s); 21k: %zu images, %zu records in %.1f s", n1,
                    ofdb1k_seconds_, resolve_threads(0), n21, r21, t21)};
    }

    Outcome determinism() {
        const fs::path& base = ofdb1k();
        const std::size_t other = resolve_threads(0) + 3;
        const fs::path again = scratch_.path() / "ofdb1k-again";
        if (run_forge("generate --dim 2 --categories 1000 --seed 7 --threads " + std::to_string(other) + " --out '" +
                      again.string() + "'") != 0) {
            return {false, "rebuild failed"};
        }
        std::string why;
        bool ok = same_build(base, again, why);
        fs::remove_all(again);
        std::size_t builds = 1;

        // 3D, eager pattern augmentation and FractalDB mode, 1 vs 4 workers.
        const std::vector<std::string> variants{
            "--dim 3 --categories 40 --seed 3",
            "--dim 2 --categories 100 --seed 5 --augmentation pattern",
            "--dim 2 --categories 100 --seed 5 --augmentation texture",
            "--mode fractaldb --categories 1 --seed 9 --side 64",
        };
        for (const auto& v : variants) {
            if (!ok) {
                break;
            }
            const fs::path a = scratch_.path() / "det-a";
            const fs::path b = scratch_.path() / "det-b";
            if (run_forge("generate " + v + " --threads 1 --out '" + a.string() + "'") != 0 ||
                run_forge("generate " + v + " --threads 4 --out '" + b.string() + "'") != 0) {
                return {false, "build failed: " + v};
            }
            ok = same_build(a, b, why);
            if (!ok) {
                why += " (" + v + ")";
            }
            fs::remove_all(a);
            fs::remove_all(b);
            ++builds;
        }
        return {ok, ok ? fmt("%zu build pairs bit-identical across worker counts (1k: %zu vs %zu workers)", builds,
                             resolve_threads(0), other)
                       : why};
    }

    Outcome reduction_identity() {
        std::mt19937_64 gen(2023);
        double worst = 0.0;
        for (std::size_t c : {2u, 10u, 100u}) {
            LabelSet identity;
            for (std::size_t i = 0; i < c; ++i) {
                identity.labels.push_back(i);
            }
            for (int trial = 0; trial < 100; ++trial) {
                const PredictionMatrix p(c, c, oracle::random_stochastic(c, c, gen));
                const double a = one_instance_nll(p, c);
                const double b = cross_entropy(p, identity);
                worst = std::max(worst, std::abs(a - b) / std::abs(b));
            }
        }
        double worst_uniform = 0.0;
        for (std::size_t c : {2u, 10u, 100u, 1000u}) {
            worst_uniform = std::max(worst_uniform, std::abs(one_instance_nll(PredictionMatrix::uniform(c, c), c) -
                                                             std::log(static_cast<double>(c))));
        }
        return {worst <= 1e-12 && worst_uniform <= 1e-12,
                fmt("max relative gap %.3g over 300 matrices (tol 1e-12); uniform vs log C max gap %.3g", worst, worst_uniform)};
    }

    Outcome chaos_statistics() {
        const IfsSystem s = oracle::sierpinski();
        const std::size_t n = 100'000;
        const PointCloud cloud = chaos_game(s, n, kDefaultBurnIn, SeedKey{2024, 0});
        std::array<std::size_t, 3> counts{};
        std::size_t unknown = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const int j = oracle::recover_sierpinski_map(cloud.coords.data() + 2 * i, cloud.coords.data() + 2 * i + 2);
            if (j < 0) {
                ++unknown;
            } else {
                ++counts[static_cast<std::size_t>(j)];
            }
        }
        const double t = static_cast<double>(n - 1);
        const double sigma = std::sqrt(t * (1.0 / 3) * (2.0 / 3));
        double worst_z = 0.0;
        for (std::size_t c : counts) {
            worst_z = std::max(worst_z, std::abs(static_cast<double>(c) - t / 3) / sigma);
        }

        // Distance of each point to the union of the three mapped copies,
        // found through a lattice hash of the mapped points.
        const double cell = 1e-6;
        std::unordered_multimap<std::uint64_t, std::array<double, 2>> images;
        images.reserve(3 * n);
        auto key = [](long long x, long long y) { return static_cast<std::uint64_t>(x) * 0x9E3779B97F4A7C15ull ^ static_cast<std::uint64_t>(y); };
        for (std::size_t i = 0; i < n; ++i) {
            const double x = cloud.coords[2 * i];
            const double y = cloud.coords[2 * i + 1];
            for (const auto& m : s.maps) {
                const std::array<double, 2> w{m.linear[0] * x + m.linear[1] * y + m.translation[0],
                                              m.linear[2] * x + m.linear[3] * y + m.translation[1]};
                images.emplace(key(std::llround(w[0] / cell), std::llround(w[1] / cell)), w);
            }
        }
        std::size_t close = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = cloud.coords[2 * i];
            const double y = cloud.coords[2 * i + 1];
            bool hit = false;
            for (long long dx = -1; dx <= 1 && !hit; ++dx) {
                for (long long dy = -1; dy <= 1 && !hit; ++dy) {
                    auto [lo, hi] = images.equal_range(key(std::llround(x / cell) + dx, std::llround(y / cell) + dy));
                    for (auto it = lo; it != hi && !hit; ++it) {
                        hit = std::hypot(it->second[0] - x, it->second[1] - y) <= 1e-6;
                    }
                }
            }
            close += hit ? 1 : 0;
        }
        const double frac = static_cast<double>(close) / static_cast<double>(n);
        return {unknown == 0 && worst_z <= 4.0 && frac >= 0.99,
                fmt("map counts %zu/%zu/%zu, max |z| %.2f (tol 4); %.4f of points within 1e-6 of the union (need 0.99)",
                    counts[0], counts[1], counts[2], worst_z, frac)};
    }

    Outcome pattern_shape() {
        std::mt19937_64 gen(55);
        const int side = 64;
        std::size_t pairs = 0;
        std::size_t identical = 0;
        std::size_t confined = 0;
        auto recover = [side](const RasterImage& img) {
            // 3x3 max-pool, then threshold at > 0.
            std::vector<std::uint8_t> occ(static_cast<std::size_t>(side * side), 0);
            for (int r = 0; r < side; ++r) {
                for (int c = 0; c < side; ++c) {
                    std::uint8_t m = 0;
                    for (int dr = -1; dr <= 1; ++dr) {
                        for (int dc = -1; dc <= 1; ++dc) {
                            if (r + dr >= 0 && r + dr < side && c + dc >= 0 && c + dc < side) {
                                m = std::max(m, img.at(r + dr, c + dc));
                            }
                        }
                    }
                    occ[static_cast<std::size_t>(r * side + c)] = m > 0 ? 1 : 0;
                }
            }
            return occ;
        };
        for (int g = 0; g < 100; ++g) {
            DotGrid grid(side);
            const std::size_t dots = 20 + gen() % 300;
            std::vector<std::uint8_t> plain(static_cast<std::size_t>(side * side), 0);
            for (std::size_t i = 0; i < dots; ++i) {
                const int r = static_cast<int>(gen() % side);
                const int c = static_cast<int>(gen() % side);
                grid.mark(r, c);
                plain[static_cast<std::size_t>(r * side + c)] = 255;
            }
            const auto near = oracle::dilate3(plain, side);
            for (int p = 0; p < 10; ++p) {
                const RasterImage a = render_pattern_aug(grid, SeedKey{static_cast<std::uint64_t>(g), 2 * static_cast<std::uint64_t>(p)});
                const RasterImage b = render_pattern_aug(grid, SeedKey{static_cast<std::uint64_t>(g), 2 * static_cast<std::uint64_t>(p) + 1});
                ++pairs;
                identical += recover(a) == recover(b) ? 1 : 0;
                const RasterImage d = abs_difference(a, b);
                bool inside = true;
                for (std::size_t k = 0; k < d.pixels.size(); ++k) {
                    inside = inside && (d.pixels[k] == 0 || near[k] != 0);
                }
                confined += inside ? 1 : 0;
            }
        }
        return {identical == pairs && confined == pairs,
                fmt("recovered occupied-cell sets identical in %zu/%zu seed pairs; difference confined to dot "
                    "neighbourhoods in %zu/%zu",
                    identical, pairs, confined, pairs)};
    }

    Outcome pattern_uniformity() {
        // Dots three cells apart, so every stamp can be read back exactly.
        const int per_axis = 32;
        const int side = 3 * per_axis;
        DotGrid grid(side);
        for (int i = 0; i < per_axis; ++i) {
            for (int j = 0; j < per_axis; ++j) {
                grid.mark(3 * i + 1, 3 * j + 1);
            }
        }
        std::vector<std::size_t> counts(kPatternCount, 0);
        std::size_t stamps = 0;
        for (std::uint64_t s = 0; s < 100; ++s) {
            const RasterImage img = render_pattern_aug(grid, SeedKey{31337, s});
            for (int i = 0; i < per_axis; ++i) {
                for (int j = 0; j < per_axis; ++j) {
                    unsigned bits = 0;
                    for (int dr = 0; dr < 3; ++dr) {
                        for (int dc = 0; dc < 3; ++dc) {
                            if (img.at(3 * i + dr, 3 * j + dc) != 0) {
                                bits |= 1u << (3 * dr + dc);
                            }
                        }
                    }
                    ++counts[bits];
                    ++stamps;
                }
            }
        }
        const double p = 1.0 / kPatternCount;
        const double expected = static_cast<double>(stamps) * p;
        const double sigma = std::sqrt(static_cast<double>(stamps) * p * (1 - p));
        double worst_z = 0.0;
        std::size_t unseen = 0;
        for (std::size_t c : counts) {
            worst_z = std::max(worst_z, std::abs(static_cast<double>(c) - expected) / sigma);
            unseen += c == 0 ? 1 : 0;
        }
        return {stamps >= 51'200 && unseen == 0 && worst_z <= 4.0,
                fmt("%zu stamps, all %d patterns seen: %s, max |z| %.2f (tol 4)", stamps, kPatternCount,
                    unseen == 0 ? "yes" : "no", worst_z)};
    }

    Outcome viewpoint_law() {
        const ViewpointSet v = enumerate_viewpoints(AxisSet{Axis::yaw}, 30);
        bool yaw_only = v.poses.size() == 12;
        for (std::size_t i = 0; i < v.poses.size(); ++i) {
            yaw_only = yaw_only && v.poses[i] == CameraPose{0, 0, 30.0 * static_cast<double>(i)};
        }
        std::vector<CameraPose> poses = enumerate_viewpoints({Axis::roll, Axis::pitch, Axis::yaw}, 30).poses;
        std::mt19937_64 gen(8);
        std::uniform_real_distribution<double> angle(0.0, 360.0);
        for (int i = 0; i < 1000; ++i) {
            poses.push_back({angle(gen), angle(gen), angle(gen)});
        }
        double worst = 0.0;
        for (const auto& pose : poses) {
            const Matrix3 m = rotation_matrix(pose);
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    double dot = 0;
                    for (int k = 0; k < 3; ++k) {
                        dot += m[static_cast<std::size_t>(3 * k + a)] * m[static_cast<std::size_t>(3 * k + b)];
                    }
                    worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
                }
            }
            const double det = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
                               m[2] * (m[3] * m[7] - m[4] * m[6]);
            worst = std::max(worst, std::abs(det - 1.0));
        }
        PointCloud cloud;
        try {
            cloud = chaos_game(oracle::sierpinski_tetrahedron(), 10'000, 100, SeedKey{1, 1});
        } catch (const Error&) {
            return {false, "tetrahedron cloud failed"};
        }
        const PointCloud p0 = project(cloud, {0, 0, 0});
        const PointCloud p360 = project(cloud, {0, 0, 360});
        double gap = 0;
        for (std::size_t k = 0; k < p0.coords.size(); ++k) {
            gap = std::max(gap, std::abs(p0.coords[k] - p360.coords[k]));
        }
        return {yaw_only && worst <= 1e-12 && gap <= 1e-9,
                fmt("{yaw}/30 gives %zu poses; max orthonormality/det error %.3g over %zu poses (tol 1e-12); yaw 360 vs 0 gap "
                    "%.3g (tol 1e-9)",
                    v.poses.size(), worst, poses.size(), gap)};
    }

    Outcome search_guarantees() {
        const DatasetManifest m = load_manifest(ofdb1k() / kManifestFileName);
        const SearchConfig cfg2 = m.spec.resolved_search();
        const auto cats = m.categories();
        std::vector<std::uint8_t> ok2(cats.size(), 0);
        parallel_for(cats.size(), 0, [&](std::size_t i) {
            const auto& c = cats[i];
            ok2[i] = c.acceptance_stat.size() == 1 && c.acceptance_stat[0] >= cfg2.fill_rate_threshold &&
                     sample_ifs(2, c.seed) == c.ifs && measure_candidate(c.ifs, c.seed, cfg2) == c.acceptance_stat;
        });
        const auto good2 = static_cast<std::size_t>(std::count(ok2.begin(), ok2.end(), 1));

        SearchConfig cfg3;
        cfg3.target_categories = 100;
        const SearchResult r3 = search_categories(cfg3, 3, 7);
        std::vector<std::uint8_t> ok3(r3.records.size(), 0);
        parallel_for(r3.records.size(), 0, [&](std::size_t i) {
            const auto& c = r3.records[i];
            bool ok = c.acceptance_stat.size() == 3 && measure_candidate(c.ifs, c.seed, cfg3) == c.acceptance_stat;
            const auto ref = oracle::two_pass_variances(category_cloud(c.ifs, c.seed, cfg3).coords);
            for (std::size_t k = 0; k < 3 && ok; ++k) {
                ok = c.acceptance_stat[k] >= cfg3.variance_threshold && std::abs(ref[k] - c.acceptance_stat[k]) <= 1e-12;
            }
            ok3[i] = ok;
        });
        const auto good3 = static_cast<std::size_t>(std::count(ok3.begin(), ok3.end(), 1));
        return {good2 == cats.size() && cats.size() == 1000 && good3 == r3.records.size() && r3.records.size() == 100,
                fmt("2D: %zu/%zu categories >= fill %.2f and re-measure exactly; 3D: %zu/%zu categories with every axis "
                    "variance >= %.3g and exact re-measure",
                    good2, cats.size(), cfg2.fill_rate_threshold, good3, r3.records.size(), cfg3.variance_threshold)};
    }

    Outcome fractaldb_expansion() {
        const fs::path out = scratch_.path() / "fractaldb";
        DatasetSpec spec = make_spec(2, 2, DatasetMode::fractaldb, 11);
        const DatasetManifest m = build(spec, out);
        const auto cats = m.categories();
        std::map<std::size_t, std::set<std::size_t>> per_category;
        for (const auto& r : m.records) {
            per_category[r.category_id].insert(r.instance_id);
        }
        bool counts = per_category.size() == 2;
        for (const auto& [id, inst] : per_category) {
            counts = counts && inst.size() == 1000 && *inst.rbegin() == 999;
        }
        const Expansion& e = *spec.expansion;
        bool closure = e.instances() == 1000;
        for (std::size_t id = 0; id < 1000; ++id) {
            closure = closure && compose_instance(e, decompose_instance(e, id)) == id;
        }
        // Variant 12 at rotation 0 / patch 0 against an OFDB-mode plain render
        // of the same category.
        DatasetSpec plain = make_spec(2, 2, DatasetMode::ofdb, 11);
        std::size_t identical = 0;
        for (const auto& c : cats) {
            const std::size_t id = compose_instance(e, InstanceIndex{0, kIdentityFluctuation, 0});
            const auto stored = read_file(out / instance_path(spec, c.category_id, id));
            identical += stored == encode_png(render_instance(plain, c, 0)) ? 1 : 0;
        }
        const std::size_t files = count_pngs(out);
        fs::remove_all(out);
        return {counts && closure && files == 2000 && identical == cats.size(),
                fmt("%zu files for 2 categories, 1000 instances each: %s, unique (rotation, fluctuation, patch) "
                    "decomposition: %s, variant 12 bit-identical to plain render: %zu/%zu",
                    files, counts ? "yes" : "no", closure ? "yes" : "no", identical, cats.size())};
    }

    Outcome pruning_policy() {
        std::mt19937_64 gen(88);
        std::size_t cases = 0;
        std::size_t matched = 0;
        auto run_case = [&](std::size_t c, std::size_t k, double ef, int distinct_scores) {
            PruningScores s;
            std::vector<std::size_t> ids;
            std::vector<std::pair<double, std::size_t>> pool;
            for (std::size_t i = 0; i < c; ++i) {
                const double score = static_cast<double>(gen() % static_cast<std::uint64_t>(distinct_scores)) /
                                     static_cast<double>(distinct_scores);
                ids.push_back(i);
                s.scores[i] = score;
                pool.emplace_back(score, i);
            }
            // Remainder of k * ef goes to the easy side.
            const auto hard = static_cast<std::size_t>(std::floor(static_cast<double>(k) * (1.0 - ef) + 1e-9));
            const auto [easy_ref, hard_ref] = oracle::select_by_extraction(pool, k - hard, hard);
            const CategorySelection sel = select_categories(ids, s, k, ef);
            ++cases;
            matched += sel.easy == easy_ref && sel.hard == hard_ref ? 1 : 0;
        };
        for (double ef : {0.0, 0.1, 0.3, 0.5, 1.0}) {
            for (int t = 0; t < 40; ++t) {
                const std::size_t c = 1 + gen() % 200;
                run_case(c, gen() % (c + 1), ef, t % 2 == 0 ? 5 : 1'000'000);
            }
            run_case(21'000, 1'000, ef, 1'000'000);
            run_case(1'000, 1'000, ef, 100);
        }
        return {matched == cases, fmt("%zu/%zu selections match the extraction oracle (ef in {0, 0.1, 0.3, 0.5, 1.0}, "
                                      "incl. 21k -> 1k)",
                                      matched, cases)};
    }

    Outcome training_smoke() {
        const fs::path out = scratch_.path() / "smoke";
        DatasetSpec spec = make_spec(2, 10, DatasetMode::ofdb, 1);
        spec.image_side = 32;
        const DatasetManifest m = build(spec, out);
        const std::size_t c = 10;
        const std::size_t d = 32 * 32;
        std::vector<double> x(c * d);
        for (const auto& r : m.records) {
            const RasterImage img = decode_png(read_file(out / r.path));
            for (std::size_t k = 0; k < d; ++k) {
                x[r.category_id * d + k] = img.pixels[k] / 255.0;
            }
        }
        fs::remove_all(out);

        // Multinomial logistic regression, full-batch gradient descent on the
        // one-instance loss.
        std::vector<double> w(d * c, 0.0);
        std::vector<double> b(c, 0.0);
        const double lr = 0.5;
        std::optional<int> solved_at;
        double loss = 0.0;
        for (int step = 0; step <= 500; ++step) {
            std::vector<double> p(c * c);
            for (std::size_t i = 0; i < c; ++i) {
                double mx = -1e300;
                for (std::size_t k = 0; k < c; ++k) {
                    double z = b[k];
                    for (std::size_t f = 0; f < d; ++f) {
                        z += x[i * d + f] * w[f * c + k];
                    }
                    p[i * c + k] = z;
                    mx = std::max(mx, z);
                }
                double sum = 0;
                for (std::size_t k = 0; k < c; ++k) {
                    p[i * c + k] = std::exp(p[i * c + k] - mx);
                    sum += p[i * c + k];
                }
                for (std::size_t k = 0; k < c; ++k) {
                    p[i * c + k] /= sum;
                }
            }
            const PredictionMatrix preds(c, c, p);
            loss = one_instance_nll(preds, c);
            std::size_t correct = 0;
            for (std::size_t i = 0; i < c; ++i) {
                const auto row = preds.row(i);
                correct += static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()) == i ? 1 : 0;
            }
            if (correct == c && !solved_at) {
                solved_at = step;
            }
            if (step == 500) {
                break;
            }
            for (std::size_t i = 0; i < c; ++i) {
                for (std::size_t k = 0; k < c; ++k) {
                    const double g = (p[i * c + k] - (i == k ? 1.0 : 0.0)) / static_cast<double>(c);
                    b[k] -= lr * g;
                    for (std::size_t f = 0; f < d; ++f) {
                        w[f * c + k] -= lr * g * x[i * d + f];
                    }
                }
            }
        }
        return {solved_at.has_value(), solved_at ? fmt("100%% training accuracy after %d steps; loss after 500 steps %.4g",
                                                      *solved_at, loss)
                                                 : fmt("not separable within 500 steps; final loss %.4g", loss)};
    }

private:
    oracle::TempDir scratch_;
    std::optional<fs::path> ofdb1k_;
    double ofdb1k_seconds_ = 0.0;
};

} // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        only.insert(std::atoi(argv[i]));
    }
    Suite suite;
    const std::vector<Criterion> criteria{
        {1, "count reproduction", true, [&] { return suite.count_reproduction(); }},
        {2, "determinism", true, [&] { return suite.determinism(); }},
        {3, "one-instance reduction", true, [&] { return suite.reduction_identity(); }},
        {4, "chaos-game statistics", true, [&] { return suite.chaos_statistics(); }},
        {5, "pattern-augmentation shape invariant", true, [&] { return suite.pattern_shape(); }},
        {6, "pattern uniformity", true, [&] { return suite.pattern_uniformity(); }},
        {7, "viewpoint law", true, [&] { return suite.viewpoint_law(); }},
        {8, "category-search guarantees", true, [&] { return suite.search_guarantees(); }},
        {9, "FractalDB-mode expansion", true, [&] { return suite.fractaldb_expansion(); }},
        {10, "pruning policy", true, [&] { return suite.pruning_policy(); }},
        {11, "training smoke test", false, [&] { return suite.training_smoke(); }},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && only.count(c.id) == 0) {
            continue;
        }
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const char* verdict = o.pass ? "PASS" : (c.gating ? "FAIL" : "FAIL (non-gating)");
        std::printf("%s [%d] %s: %s (%.1f s)\n", verdict, c.id, c.title, o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
        failed += !o.pass && c.gating ? 1 : 0;
    }
    return failed == 0 ? 0 : 1;
}
