// ofdb-forge: command-line front end for building and inspecting fractal
// datasets. Exit codes: 0 success, 1 domain error, 2 bad arguments.

#include "ofdb/category_search.hpp"
#include "ofdb/dataset.hpp"
#include "ofdb/errors.hpp"
#include "ofdb/image_io.hpp"
#include "ofdb/parallel.hpp"
#include "ofdb/train.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ofdb;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Options shared by every subcommand.
struct Common {
    std::string config_path;
    std::size_t threads = 0;
    bool json_out = false;
};

void add_common(CLI::App* sub, Common& c, bool with_threads = true) {
    sub->add_option("--config", c.config_path, "JSON file with option values; flags take precedence");
    if (with_threads) {
        sub->add_option("--threads", c.threads, "worker threads (0 = all cores; env OFDB_FORGE_THREADS)");
    }
    sub->add_flag("--json", c.json_out, "machine-readable summary on stdout");
}

json load_json_file(const fs::path& path) {
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

// Fills options that were not given on the command line from the config
// file. Keys are long option names, with '_' accepted for '-'.
json apply_config(CLI::App* sub, const std::string& path) {
    if (path.empty()) {
        return json::object();
    }
    json cfg = load_json_file(path);
    if (!cfg.is_object()) {
        throw UsageError("config file must hold a JSON object");
    }
    for (const auto& [key, value] : cfg.items()) {
        if (key == "spec" || key == "config") {
            continue;
        }
        std::string name = key;
        std::replace(name.begin(), name.end(), '_', '-');
        CLI::Option* opt = sub->get_option_no_throw("--" + name);
        if (opt == nullptr) {
            std::cerr << "ofdb-forge: warning: config key '" << key << "' does not apply to " << sub->get_name()
                      << "\n";
            continue;
        }
        if (opt->count() > 0) {
            continue;
        }
        opt->add_result(value.is_string() ? value.get<std::string>() : value.dump());
        try {
            opt->run_callback();
        } catch (const CLI::ParseError& e) {
            throw UsageError("config key '" + key + "': " + e.what());
        }
    }
    return cfg;
}

std::size_t resolve_thread_option(CLI::App* sub, std::size_t flag_value) {
    const CLI::Option* opt = sub->get_option_no_throw("--threads");
    if (opt != nullptr && opt->count() > 0) {
        return flag_value;
    }
    if (const char* env = std::getenv("OFDB_FORGE_THREADS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0') {
            throw UsageError(std::string("OFDB_FORGE_THREADS is not a number: ") + env);
        }
        return static_cast<std::size_t>(v);
    }
    return flag_value;
}

void echo_config(const std::string& command, const json& resolved) {
    std::cerr << "ofdb-forge " << command << " config: " << resolved.dump() << "\n";
}

// Accepts the manifest file itself or the dataset directory holding it.
fs::path manifest_file(const std::string& arg) {
    fs::path p(arg);
    if (fs::is_directory(p)) {
        p /= kManifestFileName;
    }
    return p;
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
    } else {
        write_text_file_atomic(path, text);
    }
}

// --------------------------------------------------------------------------
// generate

struct GenerateArgs {
    Common common;
    int dim = 2;
    std::size_t categories = 1000;
    std::uint64_t seed = 0;
    std::string out;
    std::string mode = "ofdb";
    std::string name;
    std::string augmentation = "plain";
    int fixed_patch = 0;
    std::string viewpoint_axes = "yaw";
    double viewpoint_step = 30.0;
    std::string pose_policy = "modulo";
    int side = kDefaultSide;
    double margin = kDefaultMargin;
    std::string polarity = "white_on_black";
    std::size_t points = kDefaultPoints;
    std::size_t burn_in = kDefaultBurnIn;
    double fill_rate = kDefaultFillRateThreshold;
    double variance_threshold = kDefaultVarianceThreshold;
    std::size_t max_attempts = 0;
    int probe = kDefaultProbeSide;
};

void add_generate(CLI::App& app, GenerateArgs& a) {
    CLI::App* sub = app.add_subcommand("generate", "search categories and render a dataset");
    add_common(sub, a.common);
    sub->add_option("--dim", a.dim, "2 or 3")->check(CLI::IsMember({2, 3}));
    sub->add_option("--categories", a.categories, "number of categories C")->check(CLI::PositiveNumber);
    sub->add_option("--seed", a.seed, "master seed");
    sub->add_option("--out", a.out, "output directory");
    sub->add_option("--mode", a.mode, "ofdb (one instance) or fractaldb (1,000 instances)")
        ->check(CLI::IsMember({"ofdb", "fractaldb"}));
    sub->add_option("--name", a.name, "dataset name recorded in the manifest");
    sub->add_option("--augmentation", a.augmentation, "stored render: plain, pattern, texture, fixed_patch")
        ->check(CLI::IsMember({"plain", "pattern", "texture", "fixed_patch"}));
    sub->add_option("--fixed-patch", a.fixed_patch, "patch table index for --augmentation fixed_patch")
        ->check(CLI::Range(0, 9));
    sub->add_option("--viewpoint-axes", a.viewpoint_axes, "3D: comma-separated subset of roll,pitch,yaw");
    sub->add_option("--viewpoint-step", a.viewpoint_step, "3D: angle step in degrees, divides 360");
    sub->add_option("--pose-policy", a.pose_policy, "3D: modulo or canonical")
        ->check(CLI::IsMember({"modulo", "canonical"}));
    sub->add_option("--side", a.side, "image side in pixels")->check(CLI::Range(kMinSide, 1 << 15));
    sub->add_option("--margin", a.margin, "border fraction in [0, 0.5)");
    sub->add_option("--polarity", a.polarity, "white_on_black or black_on_white")
        ->check(CLI::IsMember({"white_on_black", "black_on_white"}));
    sub->add_option("--points", a.points, "chaos-game points per fractal")->check(CLI::PositiveNumber);
    sub->add_option("--burn-in", a.burn_in, "discarded leading iterates");
    sub->add_option("--fill-rate", a.fill_rate, "2D acceptance threshold");
    sub->add_option("--variance-threshold", a.variance_threshold, "3D per-axis acceptance threshold");
    sub->add_option("--max-attempts", a.max_attempts, "search budget (0 = 50 per category)");
    sub->add_option("--probe", a.probe, "fill-rate probe side in pixels");
}

DatasetSpec resolve_generate_spec(CLI::App* sub, GenerateArgs& a, const json& cfg) {
    auto given = [&](const char* name) { return sub->get_option(name)->count() > 0; };

    DatasetSpec spec = make_spec(a.dim, a.categories, parse_dataset_mode(a.mode), a.seed);
    if (cfg.contains("spec")) {
        // A spec object (for example copied from a manifest) sits between the
        // defaults and the flags.
        json base = spec_to_json(spec);
        base.merge_patch(cfg.at("spec"));
        spec = spec_from_json(base);
        if (given("--dim")) {
            spec.dimension = a.dim;
        }
        if (given("--categories")) {
            spec.categories = a.categories;
        }
        if (given("--seed")) {
            spec.master_seed = a.seed;
        }
        if (given("--mode")) {
            const DatasetSpec fresh = make_spec(spec.dimension, spec.categories, parse_dataset_mode(a.mode), 0);
            spec.mode = fresh.mode;
            spec.expansion = fresh.expansion;
            spec.augmentation = fresh.augmentation;
        }
        if (spec.dimension == 3 && !spec.viewpoints) {
            spec.viewpoints = ViewpointConfig{};
        }
        if (spec.dimension == 2) {
            spec.viewpoints.reset();
        }
    }
    if (given("--name")) {
        spec.name = a.name;
    }
    if (given("--augmentation")) {
        spec.augmentation = parse_augmentation_mode(a.augmentation);
    }
    if (given("--fixed-patch")) {
        spec.fixed_patch_index = a.fixed_patch;
    }
    if (given("--viewpoint-axes") || given("--viewpoint-step")) {
        if (spec.dimension != 3) {
            throw UsageError("--viewpoint-axes/--viewpoint-step apply to --dim 3 only");
        }
        if (given("--viewpoint-axes")) {
            spec.viewpoints->axes = AxisSet::parse(a.viewpoint_axes);
        }
        if (given("--viewpoint-step")) {
            spec.viewpoints->step = a.viewpoint_step;
        }
    }
    if (given("--pose-policy")) {
        spec.pose_policy = parse_pose_policy(a.pose_policy);
    }
    if (given("--side")) {
        spec.image_side = a.side;
    }
    if (given("--margin")) {
        spec.margin = a.margin;
    }
    if (given("--polarity")) {
        spec.polarity = a.polarity == "black_on_white" ? Polarity::black_on_white : Polarity::white_on_black;
    }
    if (given("--points")) {
        spec.search.points = a.points;
    }
    if (given("--burn-in")) {
        spec.search.burn_in = a.burn_in;
    }
    if (given("--fill-rate")) {
        spec.search.fill_rate_threshold = a.fill_rate;
    }
    if (given("--variance-threshold")) {
        spec.search.variance_threshold = a.variance_threshold;
    }
    if (given("--max-attempts")) {
        spec.search.max_attempts = a.max_attempts;
    }
    if (given("--probe")) {
        spec.search.render_probe = a.probe;
    }
    return spec;
}

int cmd_generate(CLI::App* sub, GenerateArgs& a) {
    const json cfg = apply_config(sub, a.common.config_path);
    if (a.out.empty()) {
        throw UsageError("generate: --out is required");
    }
    DatasetSpec spec = resolve_generate_spec(sub, a, cfg);
    spec.search.threads = resolve_thread_option(sub, a.common.threads);
    spec.validate();

    echo_config("generate", {{"out", a.out}, {"threads", resolve_threads(spec.search.threads)}, {"spec", spec_to_json(spec)}});

    const auto start = std::chrono::steady_clock::now();
    std::cerr << "ofdb-forge: searching " << spec.categories << " categories (dim " << spec.dimension << ")\n";
    std::size_t next_report = 0;
    const DatasetManifest m = build(spec, a.out, [&](const BuildProgress& p) {
        const std::size_t pct = p.categories_done * 100 / p.categories_total;
        if (pct >= next_report || p.categories_done == p.categories_total) {
            std::cerr << "ofdb-forge: rendered " << p.categories_done << "/" << p.categories_total << " categories\n";
            next_report = pct + 10;
        }
    });
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const double rate = m.search_attempts == 0 ? 0.0 : static_cast<double>(spec.categories) / m.search_attempts;
    const json summary{{"manifest", (fs::path(a.out) / kManifestFileName).string()},
                       {"categories", spec.categories},
                       {"instances_per_category", spec.instances_per_category()},
                       {"images", m.records.size()},
                       {"search_attempts", m.search_attempts},
                       {"acceptance_rate", rate},
                       {"wall_time_s", seconds}};
    if (a.common.json_out) {
        std::cout << summary.dump(2) << "\n";
    } else {
        std::printf("manifest: %s\ncategories: %zu\nimages: %zu (%zu per category)\nsearch: %zu attempts, "
                    "acceptance rate %.4f\nwall time: %.2f s\n",
                    summary["manifest"].get<std::string>().c_str(), spec.categories, m.records.size(),
                    spec.instances_per_category(), m.search_attempts, rate, seconds);
    }
    return kExitOk;
}

// --------------------------------------------------------------------------
// preview-aug

struct PreviewArgs {
    Common common;
    std::string manifest;
    std::size_t category = 0;
    int dim = 2;
    std::uint64_t seed = 0;
    std::string augmentation = "pattern";
    std::uint64_t seed_a = 1;
    std::uint64_t seed_b = 2;
    int side = kDefaultSide;
    std::string out;
};

void add_preview(CLI::App& app, PreviewArgs& a) {
    CLI::App* sub = app.add_subcommand("preview-aug", "render two augmented variants of one category and their difference");
    add_common(sub, a.common);
    sub->add_option("--manifest", a.manifest, "dataset to take the category from");
    sub->add_option("--category", a.category, "category id");
    sub->add_option("--dim", a.dim, "without --manifest: search dimension")->check(CLI::IsMember({2, 3}));
    sub->add_option("--seed", a.seed, "without --manifest: master seed");
    sub->add_option("--augmentation", a.augmentation, "plain, pattern, texture or fixed_patch");
    sub->add_option("--seed-a", a.seed_a, "augmentation seed of the first variant");
    sub->add_option("--seed-b", a.seed_b, "augmentation seed of the second variant");
    sub->add_option("--side", a.side, "without --manifest: image side")->check(CLI::Range(kMinSide, 1 << 15));
    sub->add_option("--out", a.out, "output directory for a.png, b.png, diff.png");
}

int cmd_preview(CLI::App* sub, PreviewArgs& a) {
    apply_config(sub, a.common.config_path);
    if (a.out.empty()) {
        throw UsageError("preview-aug: --out is required");
    }
    const AugmentationMode mode = parse_augmentation_mode(a.augmentation);
    const std::size_t threads = resolve_thread_option(sub, a.common.threads);

    DatasetSpec spec;
    CategoryRecord category;
    if (!a.manifest.empty()) {
        const DatasetManifest m = load_manifest(manifest_file(a.manifest));
        spec = m.spec;
        const auto cats = m.categories();
        const auto it = std::find_if(cats.begin(), cats.end(), [&](const auto& c) { return c.category_id == a.category; });
        if (it == cats.end()) {
            throw InvalidArgumentError("category " + std::to_string(a.category) + " not in manifest");
        }
        category = *it;
    } else {
        spec = make_spec(a.dim, a.category + 1, DatasetMode::ofdb, a.seed);
        spec.image_side = a.side;
        spec.search.threads = threads;
        spec.validate();
        category = search_categories(spec.resolved_search(), spec.dimension, spec.master_seed).records.back();
    }
    echo_config("preview-aug", {{"manifest", a.manifest},
                                {"category", category.category_id},
                                {"augmentation", to_string(mode)},
                                {"seed_a", a.seed_a},
                                {"seed_b", a.seed_b},
                                {"out", a.out},
                                {"spec", spec_to_json(spec)}});

    const DotGrid grid = category_grid(spec, category);
    const RasterImage img_a = augment(grid, BatchEntry{category.category_id, a.seed_a, 0}, mode);
    const RasterImage img_b = augment(grid, BatchEntry{category.category_id, a.seed_b, 0}, mode);
    const RasterImage diff = abs_difference(img_a, img_b);

    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec) {
        throw IoError("cannot create " + a.out + ": " + ec.message());
    }
    write_file_atomic(fs::path(a.out) / "a.png", encode_png(img_a, spec.polarity));
    write_file_atomic(fs::path(a.out) / "b.png", encode_png(img_b, spec.polarity));
    write_file_atomic(fs::path(a.out) / "diff.png", encode_png(diff));

    const auto nonzero = static_cast<std::size_t>(
        std::count_if(diff.pixels.begin(), diff.pixels.end(), [](std::uint8_t p) { return p != 0; }));
    const json summary{{"out", a.out}, {"category", category.category_id}, {"dots", grid.count()}, {"diff_nonzero_pixels", nonzero}};
    if (a.common.json_out) {
        std::cout << summary.dump(2) << "\n";
    } else {
        std::printf("wrote %s/{a,b,diff}.png (category %zu, %zu dots, %zu differing pixels)\n", a.out.c_str(),
                    category.category_id, grid.count(), nonzero);
    }
    return kExitOk;
}

// --------------------------------------------------------------------------
// prune

struct PruneArgs {
    Common common;
    std::string manifest;
    std::string scores;
    std::size_t keep = 0;
    double easy_fraction = 0.5;
    std::string out;
    std::string filtered_manifest;
};

void add_prune(CLI::App& app, PruneArgs& a) {
    CLI::App* sub = app.add_subcommand("prune", "select k categories by difficulty score (easy/hard split)");
    add_common(sub, a.common, false);
    sub->add_option("--manifest", a.manifest, "source dataset");
    sub->add_option("--scores", a.scores, "file of 'category_id score' lines, higher = harder");
    sub->add_option("--keep", a.keep, "number of categories to keep");
    sub->add_option("--easy-fraction", a.easy_fraction, "share of easy categories in [0, 1]")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--out", a.out, "write selected ids here (default stdout)");
    sub->add_option("--filtered-manifest", a.filtered_manifest, "also write a manifest restricted to the selection");
}

int cmd_prune(CLI::App* sub, PruneArgs& a) {
    apply_config(sub, a.common.config_path);
    if (a.manifest.empty() || a.scores.empty() || sub->get_option("--keep")->count() == 0) {
        throw UsageError("prune: --manifest, --scores and --keep are required");
    }
    echo_config("prune", {{"manifest", a.manifest},
                          {"scores", a.scores},
                          {"keep", a.keep},
                          {"easy_fraction", a.easy_fraction},
                          {"out", a.out},
                          {"filtered_manifest", a.filtered_manifest}});
    const DatasetManifest m = load_manifest(manifest_file(a.manifest));
    const PruningScores scores = parse_scores(read_text_file(a.scores));
    const CategorySelection sel = select_categories(m, scores, a.keep, a.easy_fraction);

    std::vector<std::size_t> ids = sel.all_sorted();
    std::sort(ids.begin(), ids.end());
    std::ostringstream list;
    for (std::size_t id : ids) {
        list << id << "\n";
    }
    if (!a.filtered_manifest.empty()) {
        save_manifest(filter_manifest(m, ids), a.filtered_manifest);
    }
    if (a.common.json_out) {
        if (!a.out.empty()) {
            write_output(a.out, list.str());
        }
        std::cout << json{{"keep", ids.size()}, {"easy", sel.easy}, {"hard", sel.hard}}.dump(2) << "\n";
    } else {
        write_output(a.out, list.str());
        std::cerr << "ofdb-forge: selected " << sel.easy.size() << " easy + " << sel.hard.size() << " hard categories\n";
    }
    return kExitOk;
}

// --------------------------------------------------------------------------
// verify

struct VerifyArgs {
    Common common;
    std::string manifest;
    std::size_t sample = 10;
};

void add_verify(CLI::App& app, VerifyArgs& a) {
    CLI::App* sub = app.add_subcommand("verify", "check counts and checksums, spot-regenerate a sample");
    add_common(sub, a.common);
    sub->add_option("--manifest", a.manifest, "manifest file or dataset directory");
    sub->add_option("--sample", a.sample, "images to regenerate and compare bit for bit");
}

int cmd_verify(CLI::App* sub, VerifyArgs& a) {
    apply_config(sub, a.common.config_path);
    if (a.manifest.empty()) {
        throw UsageError("verify: --manifest is required");
    }
    const std::size_t threads = resolve_thread_option(sub, a.common.threads);
    echo_config("verify", {{"manifest", a.manifest}, {"sample", a.sample}, {"threads", resolve_threads(threads)}});
    const fs::path file = manifest_file(a.manifest);
    const DatasetManifest m = load_manifest(file);
    const VerifyReport r = verify(m, file.parent_path(), a.sample, threads);

    if (a.common.json_out) {
        json d = json::array();
        for (const auto& x : r.discrepancies) {
            d.push_back({{"kind", to_string(x.kind)}, {"path", x.path}, {"detail", x.detail}});
        }
        std::cout << json{{"records_checked", r.records_checked}, {"regenerated", r.regenerated}, {"discrepancies", d}}.dump(2)
                  << "\n";
    } else {
        std::printf("records checked: %zu\nregenerated: %zu\ndiscrepancies: %zu\n", r.records_checked, r.regenerated,
                    r.discrepancies.size());
        for (const auto& x : r.discrepancies) {
            std::printf("  %s %s: %s\n", to_string(x.kind).c_str(), x.path.c_str(), x.detail.c_str());
        }
    }
    return r.ok() ? kExitOk : kExitDomain;
}

// --------------------------------------------------------------------------
// stats

struct StatsArgs {
    Common common;
    std::string manifest;
    int bins = 10;
    bool no_spread = false;
};

void add_stats(CLI::App& app, StatsArgs& a) {
    CLI::App* sub = app.add_subcommand("stats", "acceptance-statistic histograms and per-category point spread");
    add_common(sub, a.common);
    sub->add_option("--manifest", a.manifest, "manifest file or dataset directory");
    sub->add_option("--bins", a.bins, "histogram bins")->check(CLI::Range(1, 1000));
    sub->add_flag("--no-spread", a.no_spread, "skip regenerating clouds for the per-category spread table");
}

struct Summary {
    double min = 0;
    double mean = 0;
    double max = 0;
    std::vector<std::size_t> hist;
};

Summary summarize(const std::vector<double>& v, int bins) {
    Summary s;
    s.hist.assign(static_cast<std::size_t>(bins), 0);
    if (v.empty()) {
        return s;
    }
    s.min = *std::min_element(v.begin(), v.end());
    s.max = *std::max_element(v.begin(), v.end());
    double sum = 0;
    for (double x : v) {
        sum += x;
        const double t = s.max > s.min ? (x - s.min) / (s.max - s.min) : 0.0;
        const auto b = std::min<std::size_t>(static_cast<std::size_t>(t * bins), static_cast<std::size_t>(bins - 1));
        ++s.hist[b];
    }
    s.mean = sum / static_cast<double>(v.size());
    return s;
}

json summary_json(const Summary& s) {
    return {{"min", s.min}, {"mean", s.mean}, {"max", s.max}, {"histogram", s.hist}};
}

void print_summary(const std::string& label, const Summary& s) {
    std::printf("%s: min %.6g  mean %.6g  max %.6g\n", label.c_str(), s.min, s.mean, s.max);
    const std::size_t peak = std::max<std::size_t>(1, *std::max_element(s.hist.begin(), s.hist.end()));
    const double width = (s.max - s.min) / static_cast<double>(s.hist.size());
    for (std::size_t b = 0; b < s.hist.size(); ++b) {
        const auto bar = static_cast<int>(std::lround(40.0 * static_cast<double>(s.hist[b]) / static_cast<double>(peak)));
        std::printf("  [%.4g, %.4g) %6zu %s\n", s.min + width * static_cast<double>(b),
                    s.min + width * static_cast<double>(b + 1), s.hist[b], std::string(static_cast<std::size_t>(bar), '#').c_str());
    }
}

struct Spread {
    std::array<double, 3> extent{};
    std::array<double, 3> stddev{};
};

int cmd_stats(CLI::App* sub, StatsArgs& a) {
    apply_config(sub, a.common.config_path);
    if (a.manifest.empty()) {
        throw UsageError("stats: --manifest is required");
    }
    const std::size_t threads = resolve_thread_option(sub, a.common.threads);
    echo_config("stats", {{"manifest", a.manifest}, {"bins", a.bins}, {"spread", !a.no_spread}, {"threads", resolve_threads(threads)}});
    const DatasetManifest m = load_manifest(manifest_file(a.manifest));
    const auto cats = m.categories();
    const int dim = m.spec.dimension;
    const SearchConfig cfg = m.spec.resolved_search();

    std::vector<std::string> labels = dim == 2 ? std::vector<std::string>{"fill_rate"}
                                               : std::vector<std::string>{"variance_x", "variance_y", "variance_z"};
    std::vector<Summary> summaries;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        std::vector<double> v;
        for (const auto& c : cats) {
            v.push_back(c.acceptance_stat.at(k));
        }
        summaries.push_back(summarize(v, a.bins));
    }

    std::vector<Spread> spreads(a.no_spread ? 0 : cats.size());
    parallel_for(spreads.size(), threads, [&](std::size_t i) {
        const PointCloud cloud = category_cloud(cats[i].ifs, cats[i].seed, cfg);
        const auto d = static_cast<std::size_t>(dim);
        Spread s;
        for (std::size_t k = 0; k < d; ++k) {
            double lo = cloud.coords[k];
            double hi = lo;
            double mean = 0;
            double m2 = 0;
            for (std::size_t p = 0; p < cloud.size(); ++p) {
                const double x = cloud.coords[p * d + k];
                lo = std::min(lo, x);
                hi = std::max(hi, x);
                const double delta = x - mean;
                mean += delta / static_cast<double>(p + 1);
                m2 += delta * (x - mean);
            }
            s.extent[k] = hi - lo;
            s.stddev[k] = std::sqrt(m2 / static_cast<double>(cloud.size()));
        }
        spreads[i] = s;
    });

    const auto d = static_cast<std::size_t>(dim);
    if (a.common.json_out) {
        json stats = json::object();
        for (std::size_t k = 0; k < labels.size(); ++k) {
            stats[labels[k]] = summary_json(summaries[k]);
        }
        json per = json::array();
        for (std::size_t i = 0; i < cats.size(); ++i) {
            json row{{"category_id", cats[i].category_id}, {"maps", cats[i].ifs.size()}, {"acceptance_stat", cats[i].acceptance_stat}};
            if (!spreads.empty()) {
                row["extent"] = std::vector<double>(spreads[i].extent.begin(), spreads[i].extent.begin() + static_cast<long>(d));
                row["stddev"] = std::vector<double>(spreads[i].stddev.begin(), spreads[i].stddev.begin() + static_cast<long>(d));
            }
            per.push_back(std::move(row));
        }
        std::cout << json{{"dimension", dim}, {"categories", cats.size()}, {"search_attempts", m.search_attempts},
                          {"stats", stats}, {"per_category", per}}
                         .dump(2)
                  << "\n";
        return kExitOk;
    }

    std::printf("categories: %zu (dim %d, %zu search attempts)\n", cats.size(), dim, m.search_attempts);
    for (std::size_t k = 0; k < labels.size(); ++k) {
        print_summary(labels[k], summaries[k]);
    }
    std::printf("\n%8s %4s %-36s %s\n", "category", "maps", "acceptance stat", spreads.empty() ? "" : "extent / stddev per axis");
    for (std::size_t i = 0; i < cats.size(); ++i) {
        std::string stat;
        for (double x : cats[i].acceptance_stat) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6g ", x);
            stat += buf;
        }
        std::string spread;
        if (!spreads.empty()) {
            for (std::size_t k = 0; k < d; ++k) {
                char buf[48];
                std::snprintf(buf, sizeof buf, "%.4g/%.4g ", spreads[i].extent[k], spreads[i].stddev[k]);
                spread += buf;
            }
        }
        std::printf("%8zu %4zu %-36s %s\n", cats[i].category_id, cats[i].ifs.size(), stat.c_str(), spread.c_str());
    }
    return kExitOk;
}

// --------------------------------------------------------------------------
// plan / stream

struct PlanArgs {
    Common common;
    std::string manifest;
    std::size_t epoch = 0;
    std::size_t batch_size = 256;
    std::string augmentation = "pattern";
    bool rotation = false;
    std::uint64_t seed = 0;
    std::string out;
};

void add_plan_options(CLI::App* sub, PlanArgs& a) {
    sub->add_option("--manifest", a.manifest, "manifest file or dataset directory");
    sub->add_option("--epoch", a.epoch, "epoch index");
    sub->add_option("--batch-size", a.batch_size, "entries per batch")->check(CLI::PositiveNumber);
    sub->add_option("--augmentation", a.augmentation, "plain, pattern, texture or fixed_patch")
        ->check(CLI::IsMember({"plain", "pattern", "texture", "fixed_patch"}));
    sub->add_flag("--rotation", a.rotation, "random quarter-turn rotation per entry");
    sub->add_option("--seed", a.seed, "plan seed");
    sub->add_option("--out", a.out, "output file (default stdout)");
}

BatchPlan make_plan(CLI::App* sub, PlanArgs& a, const std::string& command, DatasetManifest& m) {
    apply_config(sub, a.common.config_path);
    if (a.manifest.empty()) {
        throw UsageError(command + ": --manifest is required");
    }
    echo_config(command, {{"manifest", a.manifest},
                          {"epoch", a.epoch},
                          {"batch_size", a.batch_size},
                          {"augmentation", a.augmentation},
                          {"rotation", a.rotation},
                          {"seed", a.seed},
                          {"out", a.out}});
    m = load_manifest(manifest_file(a.manifest));
    return plan_epoch(m, a.epoch, a.batch_size, parse_augmentation_mode(a.augmentation), a.rotation, SeedKey{a.seed, 0});
}

int cmd_plan(CLI::App* sub, PlanArgs& a) {
    DatasetManifest m;
    const BatchPlan plan = make_plan(sub, a, "plan", m);
    write_output(a.out, plan_to_json(plan).dump(1) + "\n");
    return kExitOk;
}

int cmd_stream(CLI::App* sub, PlanArgs& a) {
    DatasetManifest m;
    const BatchPlan plan = make_plan(sub, a, "stream", m);
    const std::size_t threads = resolve_thread_option(sub, a.common.threads);

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!a.out.empty() && a.out != "-") {
        file.open(a.out, std::ios::binary | std::ios::trunc);
        if (!file) {
            throw IoError("cannot open " + a.out);
        }
        out = &file;
    }
    write_stream_header(*out);
    for (std::size_t b = 0; b < plan.batch_count(); ++b) {
        const auto entries = plan.batch(b);
        const auto images = materialize(m, plan, entries, threads);
        for (std::size_t i = 0; i < images.size(); ++i) {
            const auto png = encode_png(images[i], m.spec.polarity);
            write_stream_frame(*out, static_cast<std::uint32_t>(entries[i].category_id), png);
        }
        std::cerr << "ofdb-forge: streamed batch " << (b + 1) << "/" << plan.batch_count() << "\n";
    }
    write_stream_end(*out);
    if (!*out) {
        throw IoError("stream write failed");
    }
    if (a.common.json_out) {
        std::cerr << json{{"frames", plan.entries.size()}, {"batches", plan.batch_count()}}.dump() << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ofdb-forge: one-instance fractal dataset builder"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version());

    GenerateArgs gen;
    PreviewArgs preview;
    PruneArgs prune;
    VerifyArgs ver;
    StatsArgs stats;
    PlanArgs plan;
    PlanArgs stream;
    add_generate(app, gen);
    add_preview(app, preview);
    add_prune(app, prune);
    add_verify(app, ver);
    add_stats(app, stats);
    CLI::App* plan_sub = app.add_subcommand("plan", "write a deterministic epoch batch plan as JSON");
    add_common(plan_sub, plan.common, false);
    add_plan_options(plan_sub, plan);
    CLI::App* stream_sub = app.add_subcommand("stream", "emit one epoch of augmented images as a framed binary stream");
    add_common(stream_sub, stream.common);
    add_plan_options(stream_sub, stream);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand("generate")) {
            return cmd_generate(app.get_subcommand("generate"), gen);
        }
        if (app.got_subcommand("preview-aug")) {
            return cmd_preview(app.get_subcommand("preview-aug"), preview);
        }
        if (app.got_subcommand("prune")) {
            return cmd_prune(app.get_subcommand("prune"), prune);
        }
        if (app.got_subcommand("verify")) {
            return cmd_verify(app.get_subcommand("verify"), ver);
        }
        if (app.got_subcommand("stats")) {
            return cmd_stats(app.get_subcommand("stats"), stats);
        }
        if (app.got_subcommand("plan")) {
            return cmd_plan(plan_sub, plan);
        }
        return cmd_stream(stream_sub, stream);
    } catch (const UsageError& e) {
        std::cerr << "ofdb-forge: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "ofdb-forge: error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "ofdb-forge: error: " << e.what() << "\n";
        return kExitDomain;
    }
}
