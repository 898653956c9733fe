#include "vsd/core.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace vsd {

void warn(const std::string& message) {
    std::cerr << "vsd: warning: " << message << "\n";
}

namespace {

const std::array<std::string, kNumViolenceClasses> kClassTokens = {
    "blood", "coldarms", "explosions", "fights",
    "fire",  "firearms", "gunshots",   "screams",
};

const std::array<std::string, kNumChannels> kChannelTokens = {
    "audio", "blood", "motion", "concepts",
};

}  // namespace

const std::string& class_token(ViolenceClass c) {
    return kClassTokens[static_cast<int>(c)];
}

std::optional<ViolenceClass> class_from_token(const std::string& token) {
    for (int i = 0; i < kNumViolenceClasses; ++i)
        if (kClassTokens[i] == token) return static_cast<ViolenceClass>(i);
    return std::nullopt;
}

const std::string& channel_token(FeatureChannel c) {
    return kChannelTokens[static_cast<int>(c)];
}

std::optional<FeatureChannel> channel_from_token(const std::string& token) {
    for (int i = 0; i < kNumChannels; ++i)
        if (kChannelTokens[i] == token) return static_cast<FeatureChannel>(i);
    return std::nullopt;
}

int channel_dim(FeatureChannel c) {
    switch (c) {
        case FeatureChannel::Audio: return 22;
        case FeatureChannel::Blood: return 14;
        case FeatureChannel::Motion: return 24;
        case FeatureChannel::Concepts: return 0;
    }
    return 0;
}

FeatureVector::FeatureVector(FeatureChannel channel, std::vector<double> values)
    : channel_(channel), values_(std::move(values)) {
    const int expected = channel_dim(channel);
    if (expected > 0 && static_cast<int>(values_.size()) != expected)
        throw std::invalid_argument("FeatureVector: " + channel_token(channel) +
                                    " expects dim " + std::to_string(expected) + ", got " +
                                    std::to_string(values_.size()));
    if (values_.empty())
        throw std::invalid_argument("FeatureVector: empty value array");
    for (double v : values_)
        if (!std::isfinite(v))
            throw std::invalid_argument("FeatureVector: non-finite value in " +
                                        channel_token(channel) + " feature");
}

SegmentScoreRecord make_score_record(Segment segment, const ClassScores& scores) {
    SegmentScoreRecord rec;
    rec.segment = std::move(segment);
    rec.class_scores = scores;
    int best = 0;
    for (int i = 0; i < kNumViolenceClasses; ++i) {
        if (!(scores[i] >= 0.0 && scores[i] <= 1.0))
            throw std::invalid_argument("score record: class score outside [0,1]");
        if (scores[i] > scores[best]) best = i;  // ties keep the earlier class
    }
    const double max_score = scores[best];
    rec.label = max_score >= 0.5 ? std::optional(static_cast<ViolenceClass>(best))
                                 : std::nullopt;
    rec.binary = max_score > 0.5;
    return rec;
}

std::vector<Segment> segmentize(long frame_count, double fps, const std::string& video_id) {
    if (frame_count < 0)
        throw std::invalid_argument("segmentize: negative frame_count");
    if (!(fps > 0.0))
        throw std::invalid_argument("segmentize: fps must be positive");
    const long frames_per_segment = std::lround(fps);
    if (frames_per_segment <= 0)
        throw std::invalid_argument("segmentize: fps rounds to zero frames per segment");
    const long n = frame_count / frames_per_segment;
    std::vector<Segment> out;
    out.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i)
        out.push_back(Segment{video_id, static_cast<int>(i), i * frames_per_segment,
                              (i + 1) * frames_per_segment});
    return out;
}

namespace {

// Frames of [seg.start, seg.end) covered by the inclusive annotation range.
long overlap_frames(const Segment& seg, const Annotation& ann) {
    const long lo = std::max(seg.start_frame, ann.start_frame);
    const long hi = std::min(seg.end_frame, ann.end_frame + 1);
    return std::max(0L, hi - lo);
}

}  // namespace

std::vector<std::pair<Segment, std::set<ViolenceClass>>> label_segments(
    const std::vector<Segment>& segments, const std::vector<Annotation>& annotations) {
    std::vector<std::pair<Segment, std::set<ViolenceClass>>> out;
    out.reserve(segments.size());
    for (const Segment& seg : segments) {
        std::set<ViolenceClass> classes;
        for (const Annotation& ann : annotations)
            if (2 * overlap_frames(seg, ann) >= seg.length())
                classes.insert(ann.classes.begin(), ann.classes.end());
        out.emplace_back(seg, std::move(classes));
    }
    return out;
}

std::vector<bool> label_segments_binary(const std::vector<Segment>& segments,
                                        const std::vector<Annotation>& annotations) {
    std::vector<bool> out;
    out.reserve(segments.size());
    for (const Segment& seg : segments) {
        bool violent = false;
        for (const Annotation& ann : annotations)
            if (2 * overlap_frames(seg, ann) >= seg.length()) {
                violent = true;
                break;
            }
        out.push_back(violent);
    }
    return out;
}

}  // namespace vsd
