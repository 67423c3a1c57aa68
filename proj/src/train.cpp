#include "ofdb/train.hpp"

#include "ofdb/errors.hpp"
#include "ofdb/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>

namespace ofdb {

using nlohmann::json;

PredictionMatrix::PredictionMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (rows == 0 || cols == 0) {
        throw ShapeMismatchError("prediction matrix must be non-empty");
    }
    if (values_.size() != rows * cols) {
        throw ShapeMismatchError("prediction matrix has " + std::to_string(values_.size()) + " values, expected " +
                                 std::to_string(rows * cols));
    }
    for (std::size_t i = 0; i < rows; ++i) {
        double sum = 0.0;
        for (double p : row(i)) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw InvalidArgumentError("probabilities must lie in [0, 1]");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw InvalidArgumentError("prediction row " + std::to_string(i) + " does not sum to 1");
        }
    }
}

PredictionMatrix PredictionMatrix::uniform(std::size_t rows, std::size_t cols) {
    return PredictionMatrix(rows, cols, std::vector<double>(rows * cols, 1.0 / static_cast<double>(cols)));
}

double cross_entropy(const PredictionMatrix& preds, const LabelSet& labels) {
    if (labels.labels.size() != preds.rows()) {
        throw ShapeMismatchError("label count " + std::to_string(labels.labels.size()) + " != prediction rows " +
                                 std::to_string(preds.rows()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < preds.rows(); ++i) {
        const std::size_t y = labels.labels[i];
        if (y >= preds.cols()) {
            throw ShapeMismatchError("label " + std::to_string(y) + " out of range");
        }
        sum += std::log(std::max(preds(i, y), kProbabilityClamp));
    }
    return -sum / static_cast<double>(preds.rows());
}

double one_instance_nll(const PredictionMatrix& preds, std::size_t categories) {
    if (preds.rows() != categories || preds.cols() != categories) {
        throw ShapeMismatchError("one-instance predictions must be C x C");
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < categories; ++c) {
        sum += std::log(std::max(preds(c, c), kProbabilityClamp));
    }
    return -sum / static_cast<double>(categories);
}

std::span<const BatchEntry> BatchPlan::batch(std::size_t index) const {
    const std::size_t begin = index * batch_size;
    if (begin >= entries.size()) {
        throw InvalidArgumentError("batch index out of range");
    }
    const std::size_t end = std::min(entries.size(), begin + batch_size);
    return std::span<const BatchEntry>(entries).subspan(begin, end - begin);
}

BatchPlan plan_epoch(const std::vector<std::size_t>& category_ids, std::size_t epoch, std::size_t batch_size,
                     AugmentationMode augmentation, bool rotation, const SeedKey& seed) {
    if (batch_size < 1) {
        throw InvalidArgumentError("batch size must be >= 1");
    }
    BatchPlan plan;
    plan.epoch = epoch;
    plan.batch_size = batch_size;
    plan.augmentation = augmentation;
    plan.rotation = rotation;

    std::vector<std::size_t> order = category_ids;
    // Fisher-Yates with our own RNG; std::shuffle's output is
    // implementation-defined.
    const SeedKey epoch_key{seed.engine_seed(), hash_words({seed_tag::kEpochShuffle, epoch})};
    Rng rng(epoch_key);
    for (std::size_t i = order.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(order[i - 1], order[j]);
    }

    plan.entries.reserve(order.size());
    for (std::size_t id : order) {
        BatchEntry e;
        e.category_id = id;
        e.augmentation_seed = hash_words({seed.engine_seed(), epoch, id});
        // Rotation comes from its own word of the entry seed so the
        // augmentation stream is unaffected by enabling rotation.
        e.rotation = rotation ? static_cast<int>(mix64(e.augmentation_seed ^ 0x0A11u) & 3u) : 0;
        plan.entries.push_back(e);
    }
    return plan;
}

BatchPlan plan_epoch(const DatasetManifest& manifest, std::size_t epoch, std::size_t batch_size,
                     AugmentationMode augmentation, bool rotation, const SeedKey& seed) {
    std::vector<std::size_t> ids;
    for (const auto& c : manifest.categories()) {
        ids.push_back(c.category_id);
    }
    return plan_epoch(ids, epoch, batch_size, augmentation, rotation, seed);
}

json plan_to_json(const BatchPlan& plan) {
    json entries = json::array();
    for (const auto& e : plan.entries) {
        entries.push_back({{"category_id", e.category_id}, {"seed", e.augmentation_seed}, {"rotation", e.rotation}});
    }
    return {{"epoch", plan.epoch},
            {"batch_size", plan.batch_size},
            {"augmentation", to_string(plan.augmentation)},
            {"rotation", plan.rotation},
            {"entries", std::move(entries)}};
}

BatchPlan plan_from_json(const json& j) {
    BatchPlan plan;
    try {
        plan.epoch = j.at("epoch").get<std::size_t>();
        plan.batch_size = j.at("batch_size").get<std::size_t>();
        plan.augmentation = parse_augmentation_mode(j.at("augmentation").get<std::string>());
        plan.rotation = j.at("rotation").get<bool>();
        for (const json& e : j.at("entries")) {
            plan.entries.push_back(
                {e.at("category_id").get<std::size_t>(), e.at("seed").get<std::uint64_t>(), e.at("rotation").get<int>()});
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("batch plan: ") + e.what());
    }
    if (plan.batch_size < 1) {
        throw FormatError("batch plan: batch_size must be >= 1");
    }
    return plan;
}

RasterImage augment(const DotGrid& grid, const BatchEntry& entry, AugmentationMode augmentation) {
    const SeedKey key{entry.augmentation_seed, 0};
    RasterImage img;
    switch (augmentation) {
    case AugmentationMode::plain:
        img = render_plain(grid);
        break;
    case AugmentationMode::pattern:
        img = render_pattern_aug(grid, key);
        break;
    case AugmentationMode::texture:
        img = render_texture_aug(grid, key);
        break;
    case AugmentationMode::fixed_patch: {
        Rng rng(key);
        img = render_fixed_patch(grid, static_cast<int>(rng.below(kFixedPatches.size())));
        break;
    }
    }
    return rotate90(img, entry.rotation);
}

std::vector<RasterImage> materialize(const DatasetManifest& manifest, const BatchPlan& plan,
                                     std::span<const BatchEntry> entries, std::size_t threads) {
    const auto categories = manifest.categories();
    std::unordered_map<std::size_t, const CategoryRecord*> by_id;
    for (const auto& c : categories) {
        by_id[c.category_id] = &c;
    }
    std::vector<RasterImage> out(entries.size());
    parallel_for(entries.size(), threads, [&](std::size_t i) {
        const auto it = by_id.find(entries[i].category_id);
        if (it == by_id.end()) {
            throw InvalidArgumentError("plan references unknown category " + std::to_string(entries[i].category_id));
        }
        out[i] = augment(category_grid(manifest.spec, *it->second), entries[i], plan.augmentation);
    });
    return out;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    const char bytes[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                           static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    out.write(bytes, 4);
}

bool get_u32(std::istream& in, std::uint32_t& v) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
        return false;
    }
    v = static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
        (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
    return true;
}

constexpr char kStreamMagic[8] = {'O', 'F', 'D', 'B', 'S', 'T', 'R', 'M'};

} // namespace

void write_stream_header(std::ostream& out) {
    out.write(kStreamMagic, sizeof kStreamMagic);
    put_u32(out, kStreamVersion);
}

void write_stream_frame(std::ostream& out, std::uint32_t label, std::span<const std::uint8_t> payload) {
    if (label == kStreamEndLabel) {
        throw InvalidArgumentError("label collides with the end marker");
    }
    put_u32(out, label);
    put_u32(out, static_cast<std::uint32_t>(payload.size()));
    out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
}

void write_stream_end(std::ostream& out) {
    put_u32(out, kStreamEndLabel);
    put_u32(out, 0);
    out.flush();
}

std::vector<StreamFrame> read_stream(std::istream& in) {
    char magic[8];
    if (!in.read(magic, 8) || !std::equal(magic, magic + 8, kStreamMagic)) {
        throw FormatError("stream: bad magic");
    }
    std::uint32_t version = 0;
    if (!get_u32(in, version) || version != kStreamVersion) {
        throw FormatError("stream: unsupported version");
    }
    std::vector<StreamFrame> frames;
    for (;;) {
        StreamFrame f;
        std::uint32_t length = 0;
        if (!get_u32(in, f.label) || !get_u32(in, length)) {
            throw FormatError("stream: truncated before end marker");
        }
        if (f.label == kStreamEndLabel) {
            return frames;
        }
        f.payload.resize(length);
        if (!in.read(reinterpret_cast<char*>(f.payload.data()), static_cast<std::streamsize>(length))) {
            throw FormatError("stream: truncated payload");
        }
        frames.push_back(std::move(f));
    }
}

} // namespace ofdb
