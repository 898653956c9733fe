#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vsd/core.hpp"

namespace vsd::dataset {

// Annotation file grammar, one record per line:
//   <start_frame> <end_frame> [<class_token>...] [multiple_action]
// Class tokens are the lowercase canonical names; blank lines and '#'
// comments are ignored. A record with no class tokens marks generic violence.
std::vector<Annotation> parse_annotations(const std::string& path);
std::string serialize_annotations(const std::vector<Annotation>& annotations);

// Disjoint video-id partition of an experiment's corpus.
struct SplitSpec {
    std::vector<std::string> train_ids;
    std::vector<std::string> validation_ids;
    std::vector<std::string> test_ids;
};

SplitSpec load_split(const std::string& path);  // JSON {"train": [...], ...}
void save_split(const std::string& path, const SplitSpec& split);

// One labeled segment with its per-channel features; a channel absent from
// the map means the row is incomplete for that channel.
struct TableRow {
    std::string video_id;
    int index = 0;
    long start_frame = 0;
    long end_frame = 0;
    std::set<ViolenceClass> classes;
    bool violent = false;  // true also for generic (class-less) violence
    std::map<FeatureChannel, std::vector<double>> features;

    bool complete() const { return features.size() == kNumChannels; }
};

using FeatureTable = std::vector<TableRow>;

// Feature table file: JSON Lines, one object per segment. Lines without a
// "video_id" field (e.g. metadata headers) are skipped on read.
FeatureTable load_table(const std::string& path);
void append_table_rows(std::ostream& out, const FeatureTable& rows);

struct SampledSet {
    FeatureTable entries;  // exactly half positive, half negative
    std::uint64_t seed = 0;
};

// Balanced sampling without replacement per the experimental protocol: the
// training set draws n_train entries from rows of split.train_ids, the test
// set n_test entries from rows of split.validation_ids (the split part used
// for classifier testing and weight calculation). Only complete rows
// qualify. Deterministic given the seed; shortages name the missing label.
std::pair<SampledSet, SampledSet> balanced_sample(const FeatureTable& table,
                                                  const SplitSpec& split, long n_train,
                                                  long n_test, std::uint64_t seed);

}  // namespace vsd::dataset
