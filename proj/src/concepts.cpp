#include "vsd/concepts.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace vsd::concepts {

using nlohmann::json;

ConceptMap load_concepts(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError(path + ": cannot open");
    ConceptMap map;
    std::string line;
    std::size_t line_no = 0;
    long dim = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json row;
        try {
            row = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(path, line_no, e.what());
        }
        if (!row.is_object() || !row.contains("frame") || !row.contains("scores"))
            throw ParseError(path, line_no, "expected object with frame and scores");
        ConceptVector cv;
        try {
            cv.frame_idx = row.at("frame").get<long>();
            cv.scores = row.at("scores").get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw ParseError(path, line_no, e.what());
        }
        for (double s : cv.scores)
            if (!std::isfinite(s))
                throw ParseError(path, line_no, "non-finite concept score");
        if (cv.scores.empty())
            throw ParseError(path, line_no, "empty scores array");
        if (dim < 0)
            dim = static_cast<long>(cv.scores.size());
        else if (dim != static_cast<long>(cv.scores.size()))
            throw FormatError(path + ":" + std::to_string(line_no) +
                              ": dimension mismatch, expected " + std::to_string(dim) +
                              ", got " + std::to_string(cv.scores.size()));
        map[cv.frame_idx] = std::move(cv);
    }
    return map;
}

void save_concepts(const std::string& path, const ConceptMap& map) {
    std::ofstream out(path);
    if (!out)
        throw FormatError(path + ": cannot open for writing");
    for (const auto& [frame, cv] : map) {
        json row;
        row["frame"] = frame;
        row["scores"] = cv.scores;
        out << row.dump() << '\n';
    }
    if (!out)
        throw FormatError(path + ": write failed");
}

FeatureVector segment_concept_feature(const ConceptMap& map, const Segment& segment) {
    auto it = map.lower_bound(segment.start_frame);
    if (it == map.end() || it->first >= segment.end_frame)
        throw DataError("segment_concept_feature: no concept frame in segment " +
                        segment.video_id + "[" + std::to_string(segment.index) + "]");
    return FeatureVector(FeatureChannel::Concepts, it->second.scores);
}

}  // namespace vsd::concepts
