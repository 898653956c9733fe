#include "vsd/motion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vsd::motion {

namespace {

constexpr const char* kSidecarHeader = "frame,dst_x,dst_y,dx,dy,block_w,block_h";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ','))
        fields.push_back(field);
    return fields;
}

long parse_long(const std::string& s) {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
}

double parse_double(const std::string& s) {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

}  // namespace

SidecarMap parse_sidecar(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError(path + ": cannot open sidecar");
    std::string line;
    if (!std::getline(in, line))
        throw FormatError(path + ": empty sidecar, missing header");
    if (strip_cr(line) != kSidecarHeader)
        throw FormatError(path + ": unknown sidecar header \"" + line + "\"");

    SidecarMap map;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv(line);
        if (fields.size() != 7)
            throw ParseError(path, line_no, "expected 7 fields, got " +
                                                std::to_string(fields.size()));
        MotionVectorRecord rec;
        try {
            rec.frame_idx = parse_long(fields[0]);
            rec.dst_x = static_cast<int>(parse_long(fields[1]));
            rec.dst_y = static_cast<int>(parse_long(fields[2]));
            rec.dx = parse_double(fields[3]);
            rec.dy = parse_double(fields[4]);
            rec.block_w = static_cast<int>(parse_long(fields[5]));
            rec.block_h = static_cast<int>(parse_long(fields[6]));
        } catch (const std::exception&) {
            throw ParseError(path, line_no, "malformed record \"" + line + "\"");
        }
        if (rec.block_w <= 0 || rec.block_h <= 0)
            throw ParseError(path, line_no, "non-positive block size");
        map[rec.frame_idx].push_back(rec);
    }
    return map;
}

namespace {

// Column/row of the cell holding pixel coordinate c, with remainder pixels in
// the last cell.
int grid_cell(int coord, int extent, int cells) {
    const int span = std::max(1, extent / cells);
    return std::min(coord / span, cells - 1);
}

}  // namespace

FeatureVector motion_feature(const std::vector<MotionVectorRecord>& records, int frame_w,
                             int frame_h, long frame_count_in_segment) {
    if (frame_w <= 0 || frame_h <= 0)
        throw std::invalid_argument("motion_feature: non-positive frame dimensions");
    if (frame_count_in_segment <= 0)
        throw std::invalid_argument("motion_feature: non-positive frame count");

    std::vector<double> cells(kMotionFeatureDim, 0.0);
    long skipped = 0;
    for (const MotionVectorRecord& rec : records) {
        if (rec.dst_x < 0 || rec.dst_x >= frame_w || rec.dst_y < 0 || rec.dst_y >= frame_h) {
            ++skipped;
            continue;
        }
        const int col = grid_cell(rec.dst_x, frame_w, kGridCols);
        const int row = grid_cell(rec.dst_y, frame_h, kGridRows);
        const double block_area = static_cast<double>(rec.block_w) * rec.block_h;
        const int cell = row * kGridCols + col;
        cells[2 * cell] += std::abs(rec.dx) * block_area;
        cells[2 * cell + 1] += std::abs(rec.dy) * block_area;
    }
    if (skipped > 0)
        warn("motion_feature: skipped " + std::to_string(skipped) +
             " record(s) centered outside the frame");

    const double norm = static_cast<double>(frame_w) * frame_h *
                        static_cast<double>(frame_count_in_segment);
    for (double& v : cells) v /= norm;
    return FeatureVector(FeatureChannel::Motion, std::move(cells));
}

FeatureVector segment_motion_feature(const SidecarMap& sidecar, const Segment& segment,
                                     int frame_w, int frame_h) {
    if (segment.length() <= 0)
        throw std::invalid_argument("segment_motion_feature: empty segment");
    std::vector<MotionVectorRecord> records;
    for (auto it = sidecar.lower_bound(segment.start_frame);
         it != sidecar.end() && it->first < segment.end_frame; ++it)
        records.insert(records.end(), it->second.begin(), it->second.end());
    return motion_feature(records, frame_w, frame_h, segment.length());
}

}  // namespace vsd::motion
