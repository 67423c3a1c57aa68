#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"

#include "ofdb/errors.hpp"
#include "ofdb/train.hpp"

#include <sstream>

using namespace ofdb;

namespace {

LabelSet identity_labels(std::size_t c) {
    LabelSet l;
    for (std::size_t i = 0; i < c; ++i) {
        l.labels.push_back(i);
    }
    return l;
}

std::vector<std::size_t> iota_ids(std::size_t n) {
    std::vector<std::size_t> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        ids[i] = i;
    }
    return ids;
}

} // namespace

TEST_CASE("perfect prediction has zero loss") {
    const PredictionMatrix p(1, 3, {0, 1, 0});
    CHECK(cross_entropy(p, LabelSet{{1}}) == 0.0);
    const PredictionMatrix eye(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    CHECK(one_instance_nll(eye, 3) == 0.0);
}

TEST_CASE("uniform predictions give log C") {
    CHECK(cross_entropy(PredictionMatrix::uniform(7, 1000), LabelSet{{0, 5, 999, 3, 3, 2, 1}}) ==
          doctest::Approx(std::log(1000.0)).epsilon(1e-12));
    CHECK(std::abs(cross_entropy(PredictionMatrix::uniform(7, 1000), LabelSet{{0, 5, 999, 3, 3, 2, 1}}) - 6.907755278982137) < 1e-12);
    CHECK(std::abs(one_instance_nll(PredictionMatrix::uniform(10, 10), 10) - 2.302585092994046) < 1e-12);
}

TEST_CASE("cross entropy matches the naive double loop") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto values = oracle::random_stochastic(5, 4, gen);
        std::vector<std::size_t> labels(5);
        for (auto& y : labels) {
            y = gen() % 4;
        }
        const double ref = oracle::naive_cross_entropy(values, 5, 4, labels);
        CHECK(cross_entropy(PredictionMatrix(5, 4, values), LabelSet{labels}) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("one-instance loss is cross entropy with identity labels") {
    std::mt19937_64 gen(6);
    for (std::size_t c : {2u, 10u, 100u}) {
        for (int trial = 0; trial < 20; ++trial) {
            const PredictionMatrix p(c, c, oracle::random_stochastic(c, c, gen));
            const double a = one_instance_nll(p, c);
            const double b = cross_entropy(p, identity_labels(c));
            CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)));
            CHECK(a >= 0.0);
        }
    }
}

TEST_CASE("zero probabilities are clamped") {
    const PredictionMatrix p(1, 2, {0.0, 1.0});
    CHECK(cross_entropy(p, LabelSet{{0}}) == doctest::Approx(-std::log(1e-12)));
}

TEST_CASE("lowering a labelled probability never lowers the loss") {
    double previous = -1.0;
    for (double q = 1.0; q >= 0.0; q -= 0.05) {
        const double loss = cross_entropy(PredictionMatrix(1, 2, {q, std::max(0.0, 1.0 - q)}), LabelSet{{0}});
        CHECK(loss >= previous);
        previous = loss;
    }
}

TEST_CASE("shape and value checks") {
    CHECK_THROWS_AS(PredictionMatrix(2, 2, {1, 0, 0}), ShapeMismatchError);
    CHECK_THROWS_AS(PredictionMatrix(1, 2, {0.7, 0.7}), InvalidArgumentError);
    CHECK_THROWS_AS(PredictionMatrix(1, 2, {1.5, -0.5}), InvalidArgumentError);
    CHECK_THROWS_AS(cross_entropy(PredictionMatrix::uniform(2, 3), LabelSet{{0}}), ShapeMismatchError);
    CHECK_THROWS_AS(cross_entropy(PredictionMatrix::uniform(1, 3), LabelSet{{3}}), ShapeMismatchError);
    CHECK_THROWS_AS(one_instance_nll(PredictionMatrix::uniform(2, 3), 3), ShapeMismatchError);
}

TEST_CASE("epoch plans") {
    const auto ids = iota_ids(1000);
    const SeedKey seed{42, 0};
    const BatchPlan p0 = plan_epoch(ids, 0, 256, AugmentationMode::pattern, true, seed);
    CHECK(p0.entries == plan_epoch(ids, 0, 256, AugmentationMode::pattern, true, seed).entries);
    REQUIRE(p0.batch_count() == 4);
    CHECK(p0.batch(0).size() == 256);
    CHECK(p0.batch(1).size() == 256);
    CHECK(p0.batch(2).size() == 256);
    CHECK(p0.batch(3).size() == 232);
    CHECK_THROWS_AS(p0.batch(4), InvalidArgumentError);

    std::vector<std::size_t> seen;
    for (const auto& e : p0.entries) {
        seen.push_back(e.category_id);
        CHECK(e.rotation >= 0);
        CHECK(e.rotation <= 3);
    }
    CHECK(seen != ids);
    std::sort(seen.begin(), seen.end());
    CHECK(seen == ids);

    const BatchPlan p1 = plan_epoch(ids, 1, 256, AugmentationMode::pattern, true, seed);
    std::map<std::size_t, std::uint64_t> s0;
    for (const auto& e : p0.entries) {
        s0[e.category_id] = e.augmentation_seed;
    }
    for (const auto& e : p1.entries) {
        CHECK(s0.at(e.category_id) != e.augmentation_seed);
    }

    std::array<int, 4> rot{};
    for (const auto& e : p0.entries) {
        ++rot[static_cast<std::size_t>(e.rotation)];
    }
    for (int r : rot) {
        CHECK(std::abs(r - 250) < 4 * std::sqrt(1000 * 0.25 * 0.75));
    }

    const BatchPlan norot = plan_epoch(ids, 0, 256, AugmentationMode::pattern, false, seed);
    for (std::size_t i = 0; i < norot.entries.size(); ++i) {
        CHECK(norot.entries[i].rotation == 0);
        CHECK(norot.entries[i].augmentation_seed == p0.entries[i].augmentation_seed);
    }
    CHECK_THROWS_AS(plan_epoch(ids, 0, 0, AugmentationMode::plain, false, seed), InvalidArgumentError);
}

TEST_CASE("plan JSON round trip") {
    const BatchPlan p = plan_epoch(iota_ids(37), 3, 8, AugmentationMode::texture, true, SeedKey{1, 2});
    const BatchPlan q = plan_from_json(plan_to_json(p));
    CHECK(q.entries == p.entries);
    CHECK(q.epoch == 3);
    CHECK(q.batch_size == 8);
    CHECK(q.augmentation == AugmentationMode::texture);
    CHECK(q.rotation);
    CHECK_THROWS_AS(plan_from_json(nlohmann::json{{"epoch", 1}}), FormatError);
}

TEST_CASE("batch augmentation") {
    DotGrid g(32);
    g.mark(10, 4);
    g.mark(20, 20);
    const BatchEntry e{0, 1234, 1};
    CHECK(augment(g, e, AugmentationMode::plain) == rotate90(render_plain(g), 1));
    CHECK(augment(g, e, AugmentationMode::pattern) == augment(g, e, AugmentationMode::pattern));
    CHECK(augment(g, BatchEntry{0, 1234, 0}, AugmentationMode::pattern) == render_pattern_aug(g, SeedKey{1234, 0}));
    const RasterImage fixed = augment(g, BatchEntry{0, 99, 0}, AugmentationMode::fixed_patch);
    bool matches_table = false;
    for (int i = 0; i < 10; ++i) {
        matches_table = matches_table || fixed == render_fixed_patch(g, i);
    }
    CHECK(matches_table);
}

TEST_CASE("materialize renders each entry from the manifest") {
    oracle::TempDir dir("materialize");
    DatasetSpec spec = make_spec(2, 4, DatasetMode::ofdb, 17);
    spec.image_side = 48;
    const DatasetManifest m = build(spec, dir.path());
    const BatchPlan plan = plan_epoch(m, 0, 3, AugmentationMode::pattern, true, SeedKey{17, 1});
    const auto one = materialize(m, plan, plan.batch(0), 1);
    const auto many = materialize(m, plan, plan.batch(0), 4);
    REQUIRE(one.size() == 3);
    CHECK(one == many);
    const auto cats = m.categories();
    for (std::size_t i = 0; i < 3; ++i) {
        const BatchEntry& e = plan.entries[i];
        CHECK(one[i] == augment(category_grid(spec, cats[e.category_id]), e, AugmentationMode::pattern));
    }
    BatchPlan bad = plan;
    bad.entries[0].category_id = 99;
    CHECK_THROWS_AS(materialize(m, bad, bad.batch(0)), InvalidArgumentError);
}

TEST_CASE("stream framing") {
    std::stringstream buf;
    write_stream_header(buf);
    const std::vector<std::uint8_t> a{1, 2, 3};
    const std::vector<std::uint8_t> b{};
    write_stream_frame(buf, 7, a);
    write_stream_frame(buf, 0, b);
    write_stream_end(buf);
    const std::string raw = buf.str();
    CHECK(raw.substr(0, 8) == "OFDBSTRM");
    CHECK(raw.size() == 8 + 4 + (8 + 3) + 8 + 8);
    // Little-endian label of the first frame.
    CHECK(raw[12] == 7);
    CHECK(raw[13] == 0);

    std::stringstream in(raw);
    const auto frames = read_stream(in);
    REQUIRE(frames.size() == 2);
    CHECK(frames[0].label == 7);
    CHECK(frames[0].payload == a);
    CHECK(frames[1].payload.empty());

    std::stringstream truncated(raw.substr(0, raw.size() - 8));
    CHECK_THROWS_AS(read_stream(truncated), FormatError);
    std::stringstream bad_magic("NOTASTRM");
    CHECK_THROWS_AS(read_stream(bad_magic), FormatError);
    CHECK_THROWS_AS(write_stream_frame(buf, kStreamEndLabel, a), InvalidArgumentError);
}
