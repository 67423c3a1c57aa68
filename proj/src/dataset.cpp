#include "ofdb/dataset.hpp"

#include "ofdb/errors.hpp"
#include "ofdb/parallel.hpp"
#include "ofdb/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <set>
#include <unordered_map>

#ifndef OFDB_VERSION
#define OFDB_VERSION "dev"
#endif

namespace ofdb {

namespace fs = std::filesystem;
using nlohmann::json;

const char* tool_version() {
    return "ofdb-forge " OFDB_VERSION;
}

std::string to_string(DatasetMode mode) {
    return mode == DatasetMode::ofdb ? "ofdb" : "fractaldb";
}

std::string to_string(AugmentationMode mode) {
    switch (mode) {
    case AugmentationMode::plain:
        return "plain";
    case AugmentationMode::pattern:
        return "pattern";
    case AugmentationMode::texture:
        return "texture";
    case AugmentationMode::fixed_patch:
        return "fixed_patch";
    }
    return "plain";
}

std::string to_string(PosePolicy policy) {
    return policy == PosePolicy::modulo ? "modulo" : "canonical";
}

DatasetMode parse_dataset_mode(std::string_view text) {
    if (text == "ofdb") {
        return DatasetMode::ofdb;
    }
    if (text == "fractaldb") {
        return DatasetMode::fractaldb;
    }
    throw InvalidArgumentError("unknown dataset mode '" + std::string(text) + "' (expected ofdb or fractaldb)");
}

AugmentationMode parse_augmentation_mode(std::string_view text) {
    if (text == "plain") {
        return AugmentationMode::plain;
    }
    if (text == "pattern") {
        return AugmentationMode::pattern;
    }
    if (text == "texture") {
        return AugmentationMode::texture;
    }
    if (text == "fixed_patch" || text == "fixed-patch") {
        return AugmentationMode::fixed_patch;
    }
    throw InvalidArgumentError("unknown augmentation '" + std::string(text) +
                               "' (expected plain, pattern, texture or fixed_patch)");
}

PosePolicy parse_pose_policy(std::string_view text) {
    if (text == "modulo") {
        return PosePolicy::modulo;
    }
    if (text == "canonical") {
        return PosePolicy::canonical;
    }
    throw InvalidArgumentError("unknown pose policy '" + std::string(text) + "' (expected modulo or canonical)");
}

InstanceIndex decompose_instance(const Expansion& expansion, std::size_t instance_id) {
    if (instance_id >= static_cast<std::size_t>(expansion.instances())) {
        throw InvalidArgumentError("instance id out of range");
    }
    const auto id = static_cast<int>(instance_id);
    InstanceIndex idx;
    idx.patch = id % expansion.patches;
    idx.fluctuation = (id / expansion.patches) % expansion.fluctuations;
    idx.rotation = id / (expansion.patches * expansion.fluctuations);
    return idx;
}

std::size_t compose_instance(const Expansion& expansion, const InstanceIndex& index) {
    return static_cast<std::size_t>((index.rotation * expansion.fluctuations + index.fluctuation) * expansion.patches +
                                    index.patch);
}

SearchConfig DatasetSpec::resolved_search() const {
    SearchConfig cfg = search;
    cfg.target_categories = categories;
    cfg.margin = margin;
    cfg.require_stable_fluctuations = cfg.require_stable_fluctuations || mode == DatasetMode::fractaldb;
    return cfg;
}

void DatasetSpec::validate() const {
    if (dimension != 2 && dimension != 3) {
        throw InvalidArgumentError("dimension must be 2 or 3");
    }
    if (categories < 1) {
        throw InvalidArgumentError("categories must be >= 1");
    }
    if (image_side < kMinSide) {
        throw InvalidArgumentError("image side must be >= 8");
    }
    if (!(margin >= 0.0 && margin < 0.5)) {
        throw InvalidArgumentError("margin must be in [0, 0.5)");
    }
    if (mode == DatasetMode::ofdb && expansion) {
        throw InvalidArgumentError("OFDB mode has exactly one instance per category; drop the expansion");
    }
    if (mode == DatasetMode::fractaldb && (!expansion || *expansion != Expansion{})) {
        throw InvalidArgumentError("FractalDB mode needs the 4 x 25 x 10 expansion");
    }
    if (augmentation == AugmentationMode::fixed_patch &&
        (fixed_patch_index < 0 || fixed_patch_index >= static_cast<int>(kFixedPatches.size()))) {
        throw InvalidArgumentError("fixed patch index must be in [0, 10)");
    }
    if (viewpoints) {
        if (dimension != 3) {
            throw InvalidArgumentError("viewpoints apply to 3D datasets only");
        }
        (void)enumerate_viewpoints(viewpoints->axes, viewpoints->step);
    }
    resolved_search().validate();
}

DatasetSpec make_spec(int dimension, std::size_t categories, DatasetMode mode, std::uint64_t master_seed) {
    DatasetSpec spec;
    spec.dimension = dimension;
    spec.categories = categories;
    spec.mode = mode;
    spec.master_seed = master_seed;
    spec.name = (mode == DatasetMode::fractaldb ? "fractaldb-" : std::to_string(dimension) + "d-ofdb-") +
                std::to_string(categories);
    if (mode == DatasetMode::fractaldb) {
        spec.expansion = Expansion{};
        spec.augmentation = AugmentationMode::fixed_patch;
    }
    if (dimension == 3) {
        spec.viewpoints = ViewpointConfig{};
    }
    return spec;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json pose_to_json(const std::optional<CameraPose>& pose) {
    if (!pose) {
        return nullptr;
    }
    return json{{"roll", pose->roll}, {"pitch", pose->pitch}, {"yaw", pose->yaw}};
}

std::optional<CameraPose> pose_from_json(const json& j) {
    if (j.is_null()) {
        return std::nullopt;
    }
    return CameraPose{j.at("roll").get<double>(), j.at("pitch").get<double>(), j.at("yaw").get<double>()};
}

} // namespace

json spec_to_json(const DatasetSpec& spec) {
    json j;
    j["name"] = spec.name;
    j["dimension"] = spec.dimension;
    j["categories"] = spec.categories;
    j["mode"] = to_string(spec.mode);
    j["augmentation"] = to_string(spec.augmentation);
    j["fixed_patch_index"] = spec.fixed_patch_index;
    if (spec.expansion) {
        j["expansion"] = {{"rotations", spec.expansion->rotations},
                          {"fluctuations", spec.expansion->fluctuations},
                          {"patches", spec.expansion->patches}};
    } else {
        j["expansion"] = nullptr;
    }
    j["master_seed"] = spec.master_seed;
    j["image_side"] = spec.image_side;
    j["margin"] = spec.margin;
    j["polarity"] = spec.polarity == Polarity::white_on_black ? "white_on_black" : "black_on_white";
    const SearchConfig& s = spec.search;
    j["search"] = {{"fill_rate_threshold", s.fill_rate_threshold},
                   {"variance_threshold", s.variance_threshold},
                   {"max_attempts", s.max_attempts},
                   {"render_probe", s.render_probe},
                   {"points", s.points},
                   {"burn_in", s.burn_in},
                   {"require_stable_fluctuations", s.require_stable_fluctuations}};
    if (spec.viewpoints) {
        j["viewpoints"] = {{"axes", spec.viewpoints->axes.to_string()}, {"step", spec.viewpoints->step}};
    } else {
        j["viewpoints"] = nullptr;
    }
    j["pose_policy"] = to_string(spec.pose_policy);
    return j;
}

// Missing keys keep their defaults, so partial JSON config files work.
DatasetSpec spec_from_json(const json& j) {
    DatasetSpec spec;
    auto get = [&](const json& obj, const char* key, auto& field) {
        if (obj.contains(key) && !obj.at(key).is_null()) {
            field = obj.at(key).get<std::remove_reference_t<decltype(field)>>();
        }
    };
    try {
        get(j, "name", spec.name);
        get(j, "dimension", spec.dimension);
        get(j, "categories", spec.categories);
        if (j.contains("mode")) {
            spec.mode = parse_dataset_mode(j.at("mode").get<std::string>());
        }
        if (j.contains("augmentation")) {
            spec.augmentation = parse_augmentation_mode(j.at("augmentation").get<std::string>());
        }
        get(j, "fixed_patch_index", spec.fixed_patch_index);
        if (j.contains("expansion") && !j.at("expansion").is_null()) {
            Expansion e;
            get(j.at("expansion"), "rotations", e.rotations);
            get(j.at("expansion"), "fluctuations", e.fluctuations);
            get(j.at("expansion"), "patches", e.patches);
            spec.expansion = e;
        }
        get(j, "master_seed", spec.master_seed);
        get(j, "image_side", spec.image_side);
        get(j, "margin", spec.margin);
        if (j.contains("polarity")) {
            const auto p = j.at("polarity").get<std::string>();
            if (p == "white_on_black") {
                spec.polarity = Polarity::white_on_black;
            } else if (p == "black_on_white") {
                spec.polarity = Polarity::black_on_white;
            } else {
                throw InvalidArgumentError("unknown polarity '" + p + "'");
            }
        }
        if (j.contains("search")) {
            const json& s = j.at("search");
            get(s, "fill_rate_threshold", spec.search.fill_rate_threshold);
            get(s, "variance_threshold", spec.search.variance_threshold);
            get(s, "max_attempts", spec.search.max_attempts);
            get(s, "render_probe", spec.search.render_probe);
            get(s, "points", spec.search.points);
            get(s, "burn_in", spec.search.burn_in);
            get(s, "require_stable_fluctuations", spec.search.require_stable_fluctuations);
        }
        if (j.contains("viewpoints") && !j.at("viewpoints").is_null()) {
            ViewpointConfig v;
            if (j.at("viewpoints").contains("axes")) {
                v.axes = AxisSet::parse(j.at("viewpoints").at("axes").get<std::string>());
            }
            get(j.at("viewpoints"), "step", v.step);
            spec.viewpoints = v;
        }
        if (j.contains("pose_policy")) {
            spec.pose_policy = parse_pose_policy(j.at("pose_policy").get<std::string>());
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("dataset spec: ") + e.what());
    }
    spec.search.target_categories = spec.categories;
    return spec;
}

json manifest_to_json(const DatasetManifest& manifest) {
    json j;
    j["schema"] = "ofdb-manifest";
    j["schema_version"] = kManifestSchemaVersion;
    j["tool_version"] = manifest.tool_version;
    j["spec"] = spec_to_json(manifest.spec);
    j["search_attempts"] = manifest.search_attempts;
    j["category_file"] = manifest.category_file;
    json records = json::array();
    for (const auto& r : manifest.records) {
        records.push_back({{"category_id", r.category_id},
                           {"instance_id", r.instance_id},
                           {"path", r.path},
                           {"seed", r.seed},
                           {"pose", pose_to_json(r.pose)},
                           {"sha256", r.sha256}});
    }
    j["records"] = std::move(records);
    return j;
}

DatasetManifest manifest_from_json(const json& j) {
    DatasetManifest m;
    try {
        if (j.value("schema", std::string{}) != "ofdb-manifest") {
            throw FormatError("not an ofdb manifest");
        }
        const int version = j.at("schema_version").get<int>();
        if (version != kManifestSchemaVersion) {
            throw FormatError("unsupported manifest schema version " + std::to_string(version));
        }
        m.tool_version = j.at("tool_version").get<std::string>();
        m.spec = spec_from_json(j.at("spec"));
        m.search_attempts = j.at("search_attempts").get<std::size_t>();
        m.category_file = j.at("category_file").get<std::string>();
        for (const json& r : j.at("records")) {
            ManifestRecord rec;
            rec.category_id = r.at("category_id").get<std::size_t>();
            rec.instance_id = r.at("instance_id").get<std::size_t>();
            rec.path = r.at("path").get<std::string>();
            rec.seed = r.at("seed").get<std::uint64_t>();
            rec.pose = pose_from_json(r.at("pose"));
            rec.sha256 = r.at("sha256").get<std::string>();
            m.records.push_back(std::move(rec));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("manifest: ") + e.what());
    }
    return m;
}

std::string manifest_to_string(const DatasetManifest& manifest) {
    return manifest_to_json(manifest).dump(1) + "\n";
}

DatasetManifest load_manifest(const fs::path& path) {
    const std::string text = read_text_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return manifest_from_json(j);
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
    write_text_file_atomic(path, manifest_to_string(manifest));
}

// ---------------------------------------------------------------------------
// Rendering

std::uint64_t image_seed(std::uint64_t master_seed, std::size_t category_id, std::size_t instance_id) {
    return hash_words({master_seed, category_id, instance_id});
}

std::optional<CameraPose> category_pose(const DatasetSpec& spec, std::size_t category_id) {
    if (spec.dimension != 3) {
        return std::nullopt;
    }
    const ViewpointConfig vp = spec.viewpoints.value_or(ViewpointConfig{});
    const ViewpointSet set = enumerate_viewpoints(vp.axes, vp.step);
    if (spec.pose_policy == PosePolicy::canonical) {
        return set.poses.front();
    }
    return set.poses[category_id % set.poses.size()];
}

std::string instance_path(const DatasetSpec& spec, std::size_t category_id, std::size_t instance_id) {
    const int category_width = std::max(5, static_cast<int>(std::to_string(spec.categories - 1).size()));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%0*zu/%04zu.png", category_width, category_id, instance_id);
    return buf;
}

DotGrid category_grid(const DatasetSpec& spec, const CategoryRecord& category, int fluctuation) {
    const SearchConfig cfg = spec.resolved_search();
    const IfsSystem ifs = fluctuate_ifs(category.ifs, fluctuation);
    PointCloud cloud = category_cloud(ifs, category.seed, cfg);
    if (spec.dimension == 3) {
        cloud = project(cloud, *category_pose(spec, category.category_id));
    }
    return normalize_points(cloud, spec.image_side, spec.margin);
}

namespace {

RasterImage render_one_instance(const DatasetSpec& spec, const DotGrid& grid, std::size_t category_id,
                                std::size_t instance_id) {
    if (spec.mode == DatasetMode::fractaldb) {
        const InstanceIndex idx = decompose_instance(*spec.expansion, instance_id);
        return rotate90(render_fixed_patch(grid, idx.patch), idx.rotation);
    }
    const SeedKey seed{image_seed(spec.master_seed, category_id, instance_id), 0};
    switch (spec.augmentation) {
    case AugmentationMode::plain:
        return render_plain(grid);
    case AugmentationMode::pattern:
        return render_pattern_aug(grid, seed);
    case AugmentationMode::texture:
        return render_texture_aug(grid, seed);
    case AugmentationMode::fixed_patch:
        return render_fixed_patch(grid, spec.fixed_patch_index);
    }
    return render_plain(grid);
}

} // namespace

RasterImage render_instance(const DatasetSpec& spec, const CategoryRecord& category, std::size_t instance_id) {
    if (instance_id >= spec.instances_per_category()) {
        throw InvalidArgumentError("instance id out of range");
    }
    const int fluctuation = spec.mode == DatasetMode::fractaldb
                                ? decompose_instance(*spec.expansion, instance_id).fluctuation
                                : kIdentityFluctuation;
    const DotGrid grid = category_grid(spec, category, fluctuation);
    return render_one_instance(spec, grid, category.category_id, instance_id);
}

// ---------------------------------------------------------------------------
// Build

namespace {

std::vector<ManifestRecord> build_category(const DatasetSpec& spec, const CategoryRecord& category,
                                           const fs::path& root) {
    const std::size_t instances = spec.instances_per_category();
    const auto pose = category_pose(spec, category.category_id);
    std::vector<ManifestRecord> records(instances);

    const fs::path dir = (root / instance_path(spec, category.category_id, 0)).parent_path();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }

    auto emit = [&](std::size_t instance_id, const RasterImage& img) {
        const auto bytes = encode_png(img, spec.polarity);
        ManifestRecord& rec = records[instance_id];
        rec.category_id = category.category_id;
        rec.instance_id = instance_id;
        rec.path = instance_path(spec, category.category_id, instance_id);
        rec.seed = image_seed(spec.master_seed, category.category_id, instance_id);
        rec.pose = pose;
        rec.sha256 = sha256_hex(bytes);
        write_file_atomic(root / rec.path, bytes);
    };

    if (spec.mode == DatasetMode::ofdb) {
        const DotGrid grid = category_grid(spec, category);
        emit(0, render_one_instance(spec, grid, category.category_id, 0));
        return records;
    }
    // One chaos game per fluctuation; rotations and patches reuse its grid.
    const Expansion& e = *spec.expansion;
    for (int f = 0; f < e.fluctuations; ++f) {
        const DotGrid grid = category_grid(spec, category, f);
        for (int r = 0; r < e.rotations; ++r) {
            for (int p = 0; p < e.patches; ++p) {
                const std::size_t id = compose_instance(e, {r, f, p});
                emit(id, render_one_instance(spec, grid, category.category_id, id));
            }
        }
    }
    return records;
}

void remove_partial_build(const DatasetSpec& spec, const fs::path& root, std::size_t categories) {
    std::error_code ec;
    for (std::size_t c = 0; c < categories; ++c) {
        fs::remove_all((root / instance_path(spec, c, 0)).parent_path(), ec);
    }
    fs::remove(root / kCategoryFileName, ec);
    fs::remove(root / kManifestFileName, ec);
}

} // namespace

DatasetManifest build(const DatasetSpec& spec, const fs::path& root, const ProgressFn& progress) {
    spec.validate();
    const SearchConfig cfg = spec.resolved_search();
    SearchResult search = search_categories(cfg, spec.dimension, spec.master_seed);

    DatasetManifest manifest;
    manifest.spec = spec;
    manifest.spec.search.target_categories = spec.categories;
    manifest.category_file = format_category_file(search.records);
    manifest.search_attempts = search.attempts;
    manifest.tool_version = tool_version();

    try {
        std::error_code ec;
        fs::create_directories(root, ec);
        if (ec) {
            throw IoError("cannot create " + root.string() + ": " + ec.message());
        }
        write_text_file_atomic(root / kCategoryFileName, manifest.category_file);

        std::vector<std::vector<ManifestRecord>> per_category(search.records.size());
        std::mutex progress_mutex;
        BuildProgress state{0, search.records.size()};
        parallel_for(search.records.size(), cfg.threads, [&](std::size_t c) {
            per_category[c] = build_category(spec, search.records[c], root);
            if (progress) {
                std::lock_guard lock(progress_mutex);
                ++state.categories_done;
                progress(state);
            }
        });

        manifest.records.reserve(search.records.size() * spec.instances_per_category());
        for (auto& recs : per_category) {
            for (auto& r : recs) {
                manifest.records.push_back(std::move(r));
            }
        }
        save_manifest(manifest, root / kManifestFileName);
    } catch (const IoError&) {
        remove_partial_build(spec, root, search.records.size());
        throw;
    } catch (const fs::filesystem_error& e) {
        remove_partial_build(spec, root, search.records.size());
        throw IoError(e.what());
    }
    return manifest;
}

// ---------------------------------------------------------------------------
// Pruning

PruningScores parse_scores(std::string_view text) {
    PruningScores out;
    std::size_t line_no = 0;
    for (std::string_view line : split_lines(text)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        if (line.find_first_not_of(" \t,") == std::string_view::npos) {
            continue;
        }
        TokenReader in(line, line_no);
        const std::size_t id = in.next_uint();
        const double score = in.next_real();
        in.expect_end();
        if (!std::isfinite(score)) {
            throw FormatError("scores line " + std::to_string(line_no) + ": score is not finite");
        }
        if (!out.scores.emplace(id, score).second) {
            throw FormatError("scores line " + std::to_string(line_no) + ": duplicate category " + std::to_string(id));
        }
    }
    return out;
}

std::vector<std::size_t> CategorySelection::all_sorted() const {
    std::vector<std::size_t> all = easy;
    all.insert(all.end(), hard.begin(), hard.end());
    std::sort(all.begin(), all.end());
    return all;
}

CategorySelection select_categories(const std::vector<std::size_t>& category_ids, const PruningScores& scores,
                                    std::size_t keep, double easy_fraction) {
    if (!(easy_fraction >= 0.0 && easy_fraction <= 1.0)) {
        throw InvalidArgumentError("easy fraction must be in [0, 1]");
    }
    if (keep > category_ids.size()) {
        throw InsufficientCategoriesError("cannot keep " + std::to_string(keep) + " of " +
                                          std::to_string(category_ids.size()) + " categories");
    }
    std::set<std::size_t> known(category_ids.begin(), category_ids.end());
    for (const auto& [id, score] : scores.scores) {
        if (!known.count(id)) {
            throw InvalidArgumentError("score given for unknown category " + std::to_string(id));
        }
    }

    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(category_ids.size());
    for (std::size_t id : category_ids) {
        const auto it = scores.scores.find(id);
        if (it == scores.scores.end()) {
            throw InvalidArgumentError("no score for category " + std::to_string(id));
        }
        ranked.emplace_back(it->second, id);
    }
    std::sort(ranked.begin(), ranked.end());

    // Small epsilon so e.g. 1000 * (1 - 0.1) is not floored to 899.
    const auto hard_count = static_cast<std::size_t>(std::floor(static_cast<double>(keep) * (1.0 - easy_fraction) + 1e-9));
    const std::size_t easy_count = keep - hard_count;

    CategorySelection sel;
    for (std::size_t i = 0; i < easy_count; ++i) {
        sel.easy.push_back(ranked[i].second);
    }
    for (std::size_t i = 0; i < hard_count; ++i) {
        sel.hard.push_back(ranked[ranked.size() - 1 - i].second);
    }
    return sel;
}

CategorySelection select_categories(const DatasetManifest& manifest, const PruningScores& scores, std::size_t keep,
                                    double easy_fraction) {
    std::vector<std::size_t> ids;
    for (const auto& c : manifest.categories()) {
        ids.push_back(c.category_id);
    }
    return select_categories(ids, scores, keep, easy_fraction);
}

DatasetManifest filter_manifest(const DatasetManifest& manifest, const std::vector<std::size_t>& category_ids) {
    const std::set<std::size_t> keep(category_ids.begin(), category_ids.end());
    DatasetManifest out = manifest;
    std::vector<CategoryRecord> cats;
    for (auto& c : manifest.categories()) {
        if (keep.count(c.category_id)) {
            cats.push_back(std::move(c));
        }
    }
    out.category_file = format_category_file(cats);
    out.spec.categories = cats.size();
    out.spec.search.target_categories = cats.size();
    out.records.clear();
    for (const auto& r : manifest.records) {
        if (keep.count(r.category_id)) {
            out.records.push_back(r);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Verify

std::string to_string(Discrepancy::Kind kind) {
    switch (kind) {
    case Discrepancy::Kind::count_mismatch:
        return "count_mismatch";
    case Discrepancy::Kind::missing_file:
        return "missing_file";
    case Discrepancy::Kind::checksum_mismatch:
        return "checksum_mismatch";
    case Discrepancy::Kind::regeneration_mismatch:
        return "regeneration_mismatch";
    case Discrepancy::Kind::bad_record:
        return "bad_record";
    }
    return "unknown";
}

VerifyReport verify(const DatasetManifest& manifest, const fs::path& root, std::size_t regenerate_sample,
                    std::size_t threads) {
    VerifyReport report;
    const DatasetSpec& spec = manifest.spec;

    std::vector<CategoryRecord> categories;
    try {
        categories = manifest.categories();
    } catch (const FormatError& e) {
        report.discrepancies.push_back({Discrepancy::Kind::bad_record, kCategoryFileName, e.what()});
    }
    std::unordered_map<std::size_t, const CategoryRecord*> by_id;
    for (const auto& c : categories) {
        by_id[c.category_id] = &c;
    }

    if (categories.size() != spec.categories) {
        report.discrepancies.push_back({Discrepancy::Kind::count_mismatch, kCategoryFileName,
                                        "expected " + std::to_string(spec.categories) + " categories, found " +
                                            std::to_string(categories.size())});
    }
    const std::size_t expected_records = categories.size() * spec.instances_per_category();
    if (manifest.records.size() != expected_records) {
        report.discrepancies.push_back({Discrepancy::Kind::count_mismatch, kManifestFileName,
                                        "expected " + std::to_string(expected_records) + " records, found " +
                                            std::to_string(manifest.records.size())});
    }

    const std::size_t n = manifest.records.size();
    std::vector<std::optional<Discrepancy>> file_issues(n);
    parallel_for(n, threads, [&](std::size_t i) {
        const ManifestRecord& rec = manifest.records[i];
        const fs::path path = root / rec.path;
        std::error_code ec;
        if (!fs::is_regular_file(path, ec)) {
            file_issues[i] = Discrepancy{Discrepancy::Kind::missing_file, rec.path, "file not found"};
            return;
        }
        const std::string actual = sha256_hex(read_file(path));
        if (actual != rec.sha256) {
            file_issues[i] =
                Discrepancy{Discrepancy::Kind::checksum_mismatch, rec.path, "expected " + rec.sha256 + ", got " + actual};
        }
    });
    report.records_checked = n;
    for (auto& issue : file_issues) {
        if (issue) {
            report.discrepancies.push_back(std::move(*issue));
        }
    }

    // Regeneration is checked against the recorded checksum, not the file on
    // disk, so on-disk corruption shows up only once (as a checksum issue).
    const std::size_t sample = std::min(regenerate_sample, n);
    std::vector<std::optional<Discrepancy>> regen_issues(sample);
    parallel_for(sample, threads, [&](std::size_t k) {
        const ManifestRecord& rec = manifest.records[k * n / sample];
        const auto it = by_id.find(rec.category_id);
        if (it == by_id.end()) {
            regen_issues[k] = Discrepancy{Discrepancy::Kind::bad_record, rec.path, "category not in category file"};
            return;
        }
        if (rec.seed != image_seed(spec.master_seed, rec.category_id, rec.instance_id) ||
            rec.path != instance_path(spec, rec.category_id, rec.instance_id)) {
            regen_issues[k] = Discrepancy{Discrepancy::Kind::bad_record, rec.path, "seed or path does not re-derive"};
            return;
        }
        try {
            const auto bytes = encode_png(render_instance(spec, *it->second, rec.instance_id), spec.polarity);
            const std::string digest = sha256_hex(bytes);
            if (digest != rec.sha256) {
                regen_issues[k] = Discrepancy{Discrepancy::Kind::regeneration_mismatch, rec.path,
                                              "regenerated " + digest + ", recorded " + rec.sha256};
            }
        } catch (const Error& e) {
            regen_issues[k] = Discrepancy{Discrepancy::Kind::regeneration_mismatch, rec.path, e.what()};
        }
    });
    report.regenerated = sample;
    for (auto& issue : regen_issues) {
        if (issue) {
            report.discrepancies.push_back(std::move(*issue));
        }
    }
    return report;
}

} // namespace ofdb
