#pragma once

#include <map>
#include <string>
#include <vector>

#include "vsd/core.hpp"

namespace vsd::motion {

// One codec-exported motion vector: block of block_w x block_h pixels centered
// at (dst_x, dst_y), displaced by (dx, dy) pixels.
struct MotionVectorRecord {
    long frame_idx = 0;
    int dst_x = 0;
    int dst_y = 0;
    double dx = 0.0;
    double dy = 0.0;
    int block_w = 0;
    int block_h = 0;
};

using SidecarMap = std::map<long, std::vector<MotionVectorRecord>>;

// Sidecar CSV with header "frame,dst_x,dst_y,dx,dy,block_w,block_h".
// Records are grouped by frame with file order preserved.
SidecarMap parse_sidecar(const std::string& path);

inline constexpr int kGridCols = 3;  // slices along x
inline constexpr int kGridRows = 4;  // slices along y
inline constexpr int kMotionFeatureDim = 2 * kGridCols * kGridRows;

// Aggregates |dx|*area and |dy|*area of each block into the grid cell holding
// its center (remainder pixels belong to the last column/row), then divides
// every cell by frame_w * frame_h * frame_count_in_segment. Flattened
// row-major, dx before dy per cell. Records centered outside the frame are
// skipped with a warning.
FeatureVector motion_feature(const std::vector<MotionVectorRecord>& records, int frame_w,
                             int frame_h, long frame_count_in_segment);

// Feature over all records with frame_idx inside the segment, normalized by
// the segment's frame count. Missing frames contribute zero.
FeatureVector segment_motion_feature(const SidecarMap& sidecar, const Segment& segment,
                                     int frame_w, int frame_h);

}  // namespace vsd::motion
