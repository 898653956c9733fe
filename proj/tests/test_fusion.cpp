#include "doctest.h"

#include <cmath>
#include <fstream>
#include <random>

#include "support/oracles.hpp"
#include "support/tempdir.hpp"
#include "vsd/eval.hpp"
#include "vsd/fusion.hpp"

using namespace vsd;
using namespace vsd::fusion;

namespace {

ChannelScores make_scores(double audio, double blood, double motion, double concepts) {
    ChannelScores s;
    s.set(FeatureChannel::Audio, audio);
    s.set(FeatureChannel::Blood, blood);
    s.set(FeatureChannel::Motion, motion);
    s.set(FeatureChannel::Concepts, concepts);
    return s;
}

}  // namespace

TEST_CASE("fuse weighted sum") {
    const ChannelScores s = make_scores(0.8, 0.6, 0.2, 0.4);
    CHECK(fuse(s, {0.50, 0.45, 0.00, 0.05}) == doctest::Approx(0.69).epsilon(1e-15));
    CHECK(fuse(s, {1.0, 0.0, 0.0, 0.0}) == 0.8);
    CHECK(fuse(make_scores(0.5, 0.5, 0.5, 0.5), {0.1, 0.2, 0.3, 0.4}) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fuse rejects incomplete scores") {
    ChannelScores s;
    s.set(FeatureChannel::Audio, 0.5);
    CHECK_THROWS_AS(fuse(s, {1.0, 0.0, 0.0, 0.0}), DataError);
}

TEST_CASE("fuse monotone in any positively weighted channel") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        const ChannelScores s = make_scores(unif(rng), unif(rng), unif(rng), unif(rng));
        const WeightTuple w = {0.3, 0.3, 0.2, 0.2};
        const double base = fuse(s, w);
        for (FeatureChannel c : kAllChannels) {
            ChannelScores bumped = s;
            const double old = *bumped.get(c);
            bumped.set(c, std::min(1.0, old + 0.1));
            CHECK(fuse(bumped, w) >= base);
        }
    }
}

TEST_CASE("enumerate_weight_grid cardinalities") {
    CHECK(enumerate_weight_grid(1.0).size() == 4);
    CHECK(enumerate_weight_grid(0.5).size() == 10);
    CHECK(enumerate_weight_grid(0.05).size() == 1771);
    CHECK(enumerate_weight_grid(0.5).size() ==
          static_cast<std::size_t>(oracle::composition_count(2)));
    CHECK(enumerate_weight_grid(0.05).size() ==
          static_cast<std::size_t>(oracle::composition_count(20)));
    CHECK_THROWS_AS(enumerate_weight_grid(0.3), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_weight_grid(0.0), std::invalid_argument);
}

TEST_CASE("enumerate_weight_grid tuples sum to one in lexicographic order") {
    const auto grid = enumerate_weight_grid(0.05);
    for (const WeightTuple& t : grid) {
        double sum = 0.0;
        for (double w : t) {
            CHECK(w >= 0.0);
            CHECK(w <= 1.0);
            sum += w;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
    CHECK(grid.front() == WeightTuple{0.0, 0.0, 0.0, 1.0});
    CHECK(grid.back() == WeightTuple{1.0, 0.0, 0.0, 0.0});
    for (std::size_t i = 1; i < grid.size(); ++i)
        CHECK(grid[i - 1] < grid[i]);  // std::array lexicographic compare
}

TEST_CASE("weight_search on a perfect single channel") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<ValidationEntry> validation;
    for (int i = 0; i < 60; ++i) {
        ValidationEntry e;
        const bool positive = i % 2 == 0;
        // only audio separates; the rest are noise
        e.scores = make_scores(positive ? 0.8 + 0.2 * unif(rng) : 0.2 * unif(rng),
                               unif(rng), unif(rng), unif(rng));
        e.truth[static_cast<int>(ViolenceClass::Gunshots)] = positive;
        validation.push_back(e);
    }
    const auto result = weight_search(validation, 0.25);
    const auto& rep = result.report[static_cast<int>(ViolenceClass::Gunshots)];
    CHECK_FALSE(rep.skipped);
    CHECK(rep.eer == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rep.tuples_evaluated == enumerate_weight_grid(0.25).size());

    // default step evaluates the full 1771-tuple lattice per class
    const auto fine = weight_search(validation, 0.05);
    CHECK(fine.report[static_cast<int>(ViolenceClass::Gunshots)].tuples_evaluated == 1771);
    // every other class is single-label and skipped with uniform weights
    const auto& skipped = result.report[static_cast<int>(ViolenceClass::Blood)];
    CHECK(skipped.skipped);
    CHECK(result.weights.per_class[static_cast<int>(ViolenceClass::Blood)] ==
          WeightTuple{0.25, 0.25, 0.25, 0.25});
}

TEST_CASE("weight_search tie-break picks the lexicographically smallest tuple") {
    // all channels carry identical scores: every tuple ties
    std::vector<ValidationEntry> validation;
    for (int i = 0; i < 40; ++i) {
        ValidationEntry e;
        const double v = i % 2 == 0 ? 0.9 : 0.1;
        e.scores = make_scores(v, v, v, v);
        e.truth[static_cast<int>(ViolenceClass::Fights)] = i % 2 == 0;
        validation.push_back(e);
    }
    const auto result = weight_search(validation, 0.5);
    CHECK(result.weights.per_class[static_cast<int>(ViolenceClass::Fights)] ==
          WeightTuple{0.0, 0.0, 0.0, 1.0});
}

TEST_CASE("weight_search dominates single channels") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<ValidationEntry> validation;
        for (int i = 0; i < 50; ++i) {
            ValidationEntry e;
            const bool positive = unif(rng) < 0.5;
            // two informative channels with independent noise
            e.scores = make_scores(
                positive ? 0.55 + 0.45 * unif(rng) : 0.45 * unif(rng) + 0.1 * unif(rng),
                positive ? 0.5 + 0.5 * unif(rng) : 0.6 * unif(rng), unif(rng), unif(rng));
            e.truth[0] = positive;
            validation.push_back(e);
        }
        bool has_pos = false, has_neg = false;
        for (const auto& e : validation) {
            has_pos = has_pos || e.truth[0];
            has_neg = has_neg || !e.truth[0];
        }
        if (!has_pos || !has_neg) continue;
        const auto result = weight_search(validation, 0.1);
        const double selected_eer = result.report[0].eer;
        // unit vectors are members of the grid
        std::vector<int> labels;
        for (const auto& e : validation) labels.push_back(e.truth[0] ? 1 : 0);
        for (int c = 0; c < kNumChannels; ++c) {
            WeightTuple unit{};
            unit[c] = 1.0;
            std::vector<double> single;
            for (const auto& e : validation) single.push_back(fuse(e.scores, unit));
            CHECK(selected_eer <= eval::roc(single, labels).eer + 1e-12);
        }
    }
}

TEST_CASE("weight_search worker count does not change results") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<ValidationEntry> validation;
    for (int i = 0; i < 80; ++i) {
        ValidationEntry e;
        e.scores = make_scores(unif(rng), unif(rng), unif(rng), unif(rng));
        for (int ci = 0; ci < kNumViolenceClasses; ++ci)
            e.truth[ci] = unif(rng) < 0.3;
        validation.push_back(e);
    }
    const auto a = weight_search(validation, 0.2, 1);
    const auto b = weight_search(validation, 0.2, 4);
    for (int ci = 0; ci < kNumViolenceClasses; ++ci) {
        CHECK(a.weights.per_class[ci] == b.weights.per_class[ci]);
        CHECK(a.report[ci].eer == b.report[ci].eer);
    }
}

TEST_CASE("decide_multiclass rules") {
    FusionWeights weights;
    for (auto& w : weights.per_class) w = {0.25, 0.25, 0.25, 0.25};

    SUBCASE("clear class above threshold") {
        // craft per-class weights so one class stands out
        weights.per_class[static_cast<int>(ViolenceClass::Fire)] = {1.0, 0.0, 0.0, 0.0};
        const auto [label, scores] =
            decide_multiclass(make_scores(0.9, 0.1, 0.1, 0.1), weights);
        CHECK(label == ViolenceClass::Fire);
        CHECK(scores[static_cast<int>(ViolenceClass::Fire)] == doctest::Approx(0.9));
    }
    SUBCASE("all below 0.5 is NonViolent") {
        const auto [label, scores] =
            decide_multiclass(make_scores(0.3, 0.3, 0.3, 0.3), weights);
        CHECK_FALSE(label.has_value());
        CHECK(decide_binary(scores) == false);
    }
    SUBCASE("tie goes to the earlier canonical class") {
        const auto [label, scores] =
            decide_multiclass(make_scores(0.8, 0.8, 0.8, 0.8), weights);
        CHECK(label == ViolenceClass::Blood);  // first in canonical order
    }
    SUBCASE("boundary exactly 0.5: label assigned, binary false") {
        const auto [label, scores] =
            decide_multiclass(make_scores(0.5, 0.5, 0.5, 0.5), weights);
        REQUIRE(label.has_value());
        CHECK(decide_binary(scores) == false);
    }
}

TEST_CASE("decide_binary strict threshold") {
    ClassScores scores{};
    scores.fill(0.0);
    CHECK_FALSE(decide_binary(scores));
    scores[3] = 0.50;
    CHECK_FALSE(decide_binary(scores));  // strict "exceeds"
    scores[3] = 0.51;
    CHECK(decide_binary(scores));
}

TEST_CASE("weights file round trip") {
    testsupport::TempDir tmp;
    FusionWeights weights;
    weights.step = 0.05;
    const auto grid = enumerate_weight_grid(0.05);
    std::mt19937_64 rng(17);
    for (auto& w : weights.per_class) w = grid[rng() % grid.size()];

    const std::string path = tmp.file("weights.json");
    save_weights(path, weights, R"({"dataset_id":"fixture","seed":3})");
    const auto loaded = load_weights(path);
    CHECK(loaded.step == weights.step);
    for (int ci = 0; ci < kNumViolenceClasses; ++ci)
        CHECK(loaded.per_class[ci] == weights.per_class[ci]);
}

TEST_CASE("weights file validation") {
    testsupport::TempDir tmp;
    const std::string path = tmp.file("bad.json");
    std::ofstream(path) << R"({"step":0.5,"weights":{"blood":[0.5,0.5,0.5,0.5],
        "coldarms":[1,0,0,0],"explosions":[1,0,0,0],"fights":[1,0,0,0],
        "fire":[1,0,0,0],"firearms":[1,0,0,0],"gunshots":[1,0,0,0],
        "screams":[1,0,0,0]}})";
    CHECK_THROWS_AS(load_weights(path), FormatError);  // blood row sums to 2
}
