#pragma once

#include "ofdb/camera.hpp"
#include "ofdb/category_search.hpp"
#include "ofdb/image_io.hpp"
#include "ofdb/raster.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ofdb {

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr const char* kManifestFileName = "manifest.json";
inline constexpr const char* kCategoryFileName = "categories.txt";

const char* tool_version();

enum class DatasetMode { ofdb, fractaldb };
enum class AugmentationMode { plain, pattern, texture, fixed_patch };
// Which pose a one-instance 3D category is rendered from.
enum class PosePolicy { modulo, canonical };

std::string to_string(DatasetMode mode);
std::string to_string(AugmentationMode mode);
std::string to_string(PosePolicy policy);
DatasetMode parse_dataset_mode(std::string_view text);
AugmentationMode parse_augmentation_mode(std::string_view text);
PosePolicy parse_pose_policy(std::string_view text);

// FractalDB instance expansion. instance_id = (rotation * fluctuations +
// fluctuation) * patches + patch.
struct Expansion {
    int rotations = 4;
    int fluctuations = kFluctuationVariants;
    int patches = static_cast<int>(kFixedPatches.size());

    int instances() const { return rotations * fluctuations * patches; }
    friend bool operator==(const Expansion&, const Expansion&) = default;
};

struct InstanceIndex {
    int rotation = 0;
    int fluctuation = kIdentityFluctuation;
    int patch = 0;
    friend bool operator==(const InstanceIndex&, const InstanceIndex&) = default;
};

InstanceIndex decompose_instance(const Expansion& expansion, std::size_t instance_id);
std::size_t compose_instance(const Expansion& expansion, const InstanceIndex& index);

struct ViewpointConfig {
    AxisSet axes{Axis::yaw};
    double step = 30.0;
    friend bool operator==(const ViewpointConfig&, const ViewpointConfig&) = default;
};

struct DatasetSpec {
    std::string name = "ofdb";
    int dimension = 2;
    std::size_t categories = 1000;
    DatasetMode mode = DatasetMode::ofdb;
    AugmentationMode augmentation = AugmentationMode::plain;
    int fixed_patch_index = 0; // augmentation == fixed_patch in OFDB mode
    std::optional<Expansion> expansion;
    std::uint64_t master_seed = 0;
    int image_side = kDefaultSide;
    double margin = kDefaultMargin;
    Polarity polarity = Polarity::white_on_black;
    SearchConfig search;                      // target_categories follows `categories`
    std::optional<ViewpointConfig> viewpoints; // 3D only; defaults to yaw every 30 degrees
    PosePolicy pose_policy = PosePolicy::modulo;

    std::size_t instances_per_category() const { return expansion ? static_cast<std::size_t>(expansion->instances()) : 1; }
    SearchConfig resolved_search() const;
    void validate() const;
};

// OFDB-1k style defaults; `fractaldb` switches on the x1000 expansion.
DatasetSpec make_spec(int dimension, std::size_t categories, DatasetMode mode, std::uint64_t master_seed);

struct ManifestRecord {
    std::size_t category_id = 0;
    std::size_t instance_id = 0;
    std::string path; // relative to the dataset root
    std::uint64_t seed = 0;
    std::optional<CameraPose> pose;
    std::string sha256;

    friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

struct DatasetManifest {
    DatasetSpec spec;
    std::string category_file; // verbatim contents of categories.txt
    std::size_t search_attempts = 0;
    std::vector<ManifestRecord> records;
    std::string tool_version;

    std::vector<CategoryRecord> categories() const { return parse_category_file(category_file); }
};

nlohmann::json spec_to_json(const DatasetSpec& spec);
DatasetSpec spec_from_json(const nlohmann::json& j);
nlohmann::json manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const nlohmann::json& j);
std::string manifest_to_string(const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

// hash(master_seed, category_id, instance_id); any single image can be
// regenerated from this without rebuilding the dataset.
std::uint64_t image_seed(std::uint64_t master_seed, std::size_t category_id, std::size_t instance_id);

std::optional<CameraPose> category_pose(const DatasetSpec& spec, std::size_t category_id);

std::string instance_path(const DatasetSpec& spec, std::size_t category_id, std::size_t instance_id);

// Dot grid of the category's fractal (after fluctuation and, in 3D,
// projection) at the dataset resolution.
DotGrid category_grid(const DatasetSpec& spec, const CategoryRecord& category, int fluctuation = kIdentityFluctuation);

RasterImage render_instance(const DatasetSpec& spec, const CategoryRecord& category, std::size_t instance_id);

struct BuildProgress {
    std::size_t categories_done = 0;
    std::size_t categories_total = 0;
};
using ProgressFn = std::function<void(const BuildProgress&)>;

// Searches categories, renders every instance to
// root/<category>/<instance>.png, and writes categories.txt and
// manifest.json. On an I/O failure the files written so far are removed
// and IoError is rethrown.
DatasetManifest build(const DatasetSpec& spec, const std::filesystem::path& root, const ProgressFn& progress = {});

// Category-level difficulty scores (higher = harder).
struct PruningScores {
    std::map<std::size_t, double> scores;
};

// "id score" per line (comma or whitespace separated); '#' starts a comment.
// Duplicate ids are a FormatError.
PruningScores parse_scores(std::string_view text);

struct CategorySelection {
    std::vector<std::size_t> easy; // ascending score
    std::vector<std::size_t> hard; // descending score

    std::vector<std::size_t> all_sorted() const;
};

// Ranks by (score, id) ascending and keeps the k - floor(k*(1-easy_fraction))
// lowest plus the floor(k*(1-easy_fraction)) highest.
CategorySelection select_categories(const std::vector<std::size_t>& category_ids, const PruningScores& scores,
                                    std::size_t keep, double easy_fraction);
CategorySelection select_categories(const DatasetManifest& manifest, const PruningScores& scores, std::size_t keep,
                                    double easy_fraction);

// Keeps the chosen categories and renumbers nothing: paths and ids stay
// valid against the original root.
DatasetManifest filter_manifest(const DatasetManifest& manifest, const std::vector<std::size_t>& category_ids);

struct Discrepancy {
    enum class Kind { count_mismatch, missing_file, checksum_mismatch, regeneration_mismatch, bad_record };
    Kind kind;
    std::string path;
    std::string detail;
};

std::string to_string(Discrepancy::Kind kind);

struct VerifyReport {
    std::size_t records_checked = 0;
    std::size_t regenerated = 0;
    std::vector<Discrepancy> discrepancies;

    bool ok() const { return discrepancies.empty(); }
};

// Recomputes every checksum against the files under root, checks record
// counts, and re-renders `regenerate_sample` evenly spaced records to
// confirm they reproduce their recorded checksum.
VerifyReport verify(const DatasetManifest& manifest, const std::filesystem::path& root, std::size_t regenerate_sample = 10,
                    std::size_t threads = 0);

} // namespace ofdb
