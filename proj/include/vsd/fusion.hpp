#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "vsd/core.hpp"

namespace vsd::fusion {

// Convex weights over the four channels, ordered (audio, blood, motion,
// concepts). Each tuple lies on the probability simplex.
using WeightTuple = std::array<double, kNumChannels>;

struct FusionWeights {
    std::array<WeightTuple, kNumViolenceClasses> per_class{};
    double step = 0.05;
};

// Per-segment channel probabilities; a segment missing any channel is
// incomplete and cannot be fused.
struct ChannelScores {
    std::array<std::optional<double>, kNumChannels> score{};

    bool complete() const {
        for (const auto& s : score)
            if (!s) return false;
        return true;
    }
    void set(FeatureChannel c, double v) { score[static_cast<int>(c)] = v; }
    std::optional<double> get(FeatureChannel c) const { return score[static_cast<int>(c)]; }
};

// Weighted sum of the four channel scores; result stays in [0,1] for valid
// simplex weights. Throws DataError on a missing channel.
double fuse(const ChannelScores& scores, const WeightTuple& weights);

// All 4-tuples of multiples of `step` in [0,1] summing to 1, in lexicographic
// order; 1/step must be integral.
std::vector<WeightTuple> enumerate_weight_grid(double step = 0.05);

struct WeightSearchClassReport {
    ViolenceClass violence_class;
    bool skipped = false;  // single-label ground truth
    double eer = 1.0;
    std::size_t tuples_evaluated = 0;
};

struct WeightSearchResult {
    FusionWeights weights;
    std::vector<WeightSearchClassReport> report;
};

// Per-class validation sample: complete channel scores plus binary membership
// per violence class.
struct ValidationEntry {
    ChannelScores scores;
    std::array<bool, kNumViolenceClasses> truth{};
};

// Exhaustive simplex search minimizing per-class EER; ties go to the
// lexicographically smallest tuple. Classes with single-label ground truth
// are skipped with a warning and receive uniform weights. Classes may be
// searched concurrently; per-class results are reduced in order.
WeightSearchResult weight_search(const std::vector<ValidationEntry>& validation,
                                 double step = 0.05, int workers = 1);

// Fused score per class; label = argmax class when the maximum is >= 0.5,
// NonViolent otherwise (ties to the canonical earlier class).
std::pair<std::optional<ViolenceClass>, ClassScores> decide_multiclass(
    const ChannelScores& scores, const FusionWeights& weights);

// True iff the maximum class score strictly exceeds 0.5.
bool decide_binary(const ClassScores& class_scores);

// Weights file: JSON map class -> [w_audio, w_blood, w_motion, w_concepts]
// plus step and provenance.
void save_weights(const std::string& path, const FusionWeights& weights,
                  const std::string& meta_json = {});
FusionWeights load_weights(const std::string& path);

}  // namespace vsd::fusion
