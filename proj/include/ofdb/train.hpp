#pragma once

#include "ofdb/dataset.hpp"
#include "ofdb/raster.hpp"
#include "ofdb/seed.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "json.hpp"

namespace ofdb {

inline constexpr double kProbabilityClamp = 1e-12;

// Row-stochastic N x C matrix of predicted category probabilities.
class PredictionMatrix {
public:
    PredictionMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    static PredictionMatrix uniform(std::size_t rows, std::size_t cols);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double operator()(std::size_t i, std::size_t c) const { return values_[i * cols_ + c]; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
};

// y_i as category indices (one-hot positions).
struct LabelSet {
    std::vector<std::size_t> labels;
};

// -(1/N) sum_i log p_{i, y_i}, probabilities clamped below at 1e-12.
double cross_entropy(const PredictionMatrix& preds, const LabelSet& labels);

// One image per category, row c belongs to category c:
// -(1/C) sum_c log p_{c,c}.
double one_instance_nll(const PredictionMatrix& preds, std::size_t categories);

struct BatchEntry {
    std::size_t category_id = 0;
    std::uint64_t augmentation_seed = 0;
    int rotation = 0; // quarter turns, 0 when rotation is disabled

    friend bool operator==(const BatchEntry&, const BatchEntry&) = default;
};

struct BatchPlan {
    std::size_t epoch = 0;
    std::size_t batch_size = 1;
    AugmentationMode augmentation = AugmentationMode::pattern;
    bool rotation = false;
    std::vector<BatchEntry> entries;

    std::size_t batch_count() const { return (entries.size() + batch_size - 1) / batch_size; }
    std::span<const BatchEntry> batch(std::size_t index) const;
};

// Shuffles the category list with a key derived from (seed, epoch) and gives
// each entry its own augmentation seed, so every epoch sees a fresh draw.
BatchPlan plan_epoch(const std::vector<std::size_t>& category_ids, std::size_t epoch, std::size_t batch_size,
                     AugmentationMode augmentation, bool rotation, const SeedKey& seed);
BatchPlan plan_epoch(const DatasetManifest& manifest, std::size_t epoch, std::size_t batch_size,
                     AugmentationMode augmentation, bool rotation, const SeedKey& seed);

nlohmann::json plan_to_json(const BatchPlan& plan);
BatchPlan plan_from_json(const nlohmann::json& j);

// Applies the fractal-specific kernels to a stored dot grid: the entry's
// augmentation draw, then its rotation. fixed_patch picks one of the ten
// table patterns from the entry seed.
RasterImage augment(const DotGrid& grid, const BatchEntry& entry, AugmentationMode augmentation);

// Renders the entries of `plan` (optionally one batch) in entry order, using
// up to `threads` workers.
std::vector<RasterImage> materialize(const DatasetManifest& manifest, const BatchPlan& plan,
                                     std::span<const BatchEntry> entries, std::size_t threads = 0);

// Stream framing, all integers little-endian:
//   header: "OFDBSTRM" (8 bytes), u32 version = 1
//   frame:  u32 label, u32 payload length, payload (PNG bytes)
//   end:    u32 0xFFFFFFFF, u32 0
inline constexpr std::uint32_t kStreamVersion = 1;
inline constexpr std::uint32_t kStreamEndLabel = 0xFFFFFFFFu;

void write_stream_header(std::ostream& out);
void write_stream_frame(std::ostream& out, std::uint32_t label, std::span<const std::uint8_t> payload);
void write_stream_end(std::ostream& out);

struct StreamFrame {
    std::uint32_t label = 0;
    std::vector<std::uint8_t> payload;
};

// Parses a complete stream; throws FormatError on bad framing.
std::vector<StreamFrame> read_stream(std::istream& in);

} // namespace ofdb
