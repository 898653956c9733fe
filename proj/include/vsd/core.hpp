#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vsd/errors.hpp"

namespace vsd {

// Violence categories in canonical order. Per-class arrays index by this order,
// so the enum values are stable public contract.
enum class ViolenceClass : int {
    Blood = 0,
    ColdArms,
    Explosions,
    Fights,
    Fire,
    Firearms,
    Gunshots,
    Screams,
};

inline constexpr int kNumViolenceClasses = 8;

inline constexpr std::array<ViolenceClass, kNumViolenceClasses> kAllViolenceClasses = {
    ViolenceClass::Blood,    ViolenceClass::ColdArms, ViolenceClass::Explosions,
    ViolenceClass::Fights,   ViolenceClass::Fire,     ViolenceClass::Firearms,
    ViolenceClass::Gunshots, ViolenceClass::Screams,
};

// Lowercase tokens used in annotation files and JSON ("blood", "coldarms", ...).
const std::string& class_token(ViolenceClass c);
std::optional<ViolenceClass> class_from_token(const std::string& token);

// Feature modalities. Fusion weight tuples follow this order:
// (audio, blood, motion, concepts).
enum class FeatureChannel : int {
    Audio = 0,
    Blood,
    Motion,
    Concepts,
};

inline constexpr int kNumChannels = 4;

inline constexpr std::array<FeatureChannel, kNumChannels> kAllChannels = {
    FeatureChannel::Audio,
    FeatureChannel::Blood,
    FeatureChannel::Motion,
    FeatureChannel::Concepts,
};

const std::string& channel_token(FeatureChannel c);
std::optional<FeatureChannel> channel_from_token(const std::string& token);

// Fixed per-channel feature dimensions; 0 means configurable (Concepts).
int channel_dim(FeatureChannel c);

// One-second slice of a video, [start_frame, end_frame).
struct Segment {
    std::string video_id;
    int index = 0;  // 0-based second offset
    long start_frame = 0;
    long end_frame = 0;  // exclusive

    long length() const { return end_frame - start_frame; }
};

// Ground-truth scene annotation; end_frame is inclusive. An empty class set
// marks generic violence in binary-only datasets.
struct Annotation {
    long start_frame = 0;
    long end_frame = 0;
    std::set<ViolenceClass> classes;
    bool multiple_action = false;
};

// Channel-tagged fixed-length feature vector. Construction enforces the
// per-channel dimension contract and rejects non-finite values.
class FeatureVector {
public:
    FeatureVector(FeatureChannel channel, std::vector<double> values);

    FeatureChannel channel() const { return channel_; }
    const std::vector<double>& values() const { return values_; }
    int dim() const { return static_cast<int>(values_.size()); }

private:
    FeatureChannel channel_;
    std::vector<double> values_;
};

using ClassScores = std::array<double, kNumViolenceClasses>;

// Per-segment fused scores and the derived decisions. Build through
// make_score_record so label/binary always satisfy the decision rules:
// label = argmax class when max score >= 0.5, otherwise NonViolent (nullopt);
// binary = (max score > 0.5), strict.
struct SegmentScoreRecord {
    Segment segment;
    ClassScores class_scores{};
    std::optional<ViolenceClass> label;  // nullopt = NonViolent
    bool binary = false;
};

SegmentScoreRecord make_score_record(Segment segment, const ClassScores& scores);

// Cuts a video of frame_count frames into consecutive round(fps)-frame
// segments; the trailing partial second is dropped.
std::vector<Segment> segmentize(long frame_count, double fps,
                                const std::string& video_id = {});

// A segment carries class C iff some annotation carrying C overlaps at least
// half of the segment's frames. Contradictory annotations are unioned.
std::vector<std::pair<Segment, std::set<ViolenceClass>>> label_segments(
    const std::vector<Segment>& segments, const std::vector<Annotation>& annotations);

// Binary ground truth: true iff any annotation (classed or generic) overlaps
// at least half of the segment's frames.
std::vector<bool> label_segments_binary(const std::vector<Segment>& segments,
                                        const std::vector<Annotation>& annotations);

}  // namespace vsd
