#pragma once

#include <map>
#include <string>
#include <vector>

#include "vsd/core.hpp"

namespace vsd::concepts {

// Precomputed per-frame concept scores; D is fixed per dataset.
struct ConceptVector {
    long frame_idx = 0;
    std::vector<double> scores;
};

using ConceptMap = std::map<long, ConceptVector>;

// JSON Lines, one object per line: {"frame": <int>, "scores": [<number>...]}.
// Every row must share one dimension; a mismatch names the offending line.
ConceptMap load_concepts(const std::string& path);
void save_concepts(const std::string& path, const ConceptMap& map);

// Vector of the segment's first available frame (concepts are sampled one
// frame per second); throws DataError when the segment holds no frame.
FeatureVector segment_concept_feature(const ConceptMap& map, const Segment& segment);

}  // namespace vsd::concepts
