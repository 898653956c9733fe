#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vsd/core.hpp"
#include "vsd/image.hpp"

namespace vsd::blood {

inline constexpr int kBinsPerAxis = 32;
inline constexpr int kBinWidth = 8;
inline constexpr int kTotalBins = kBinsPerAxis * kBinsPerAxis * kBinsPerAxis;

struct BinIndex {
    int r, g, b;
};

// Maps each 0-255 component to floor(c / 8).
BinIndex bin_of(int r, int g, int b);

// Normalized 32x32x32 RGB histogram; used for both the blood and the
// non-blood model. probs[i] = counts[i] / total once total > 0; a model with
// total == 0 is unnormalized and all probabilities are zero.
class ColorModel3D {
public:
    ColorModel3D();

    void add_pixel(int r, int g, int b);  // increments the bin count
    void normalize();                     // recomputes probs from counts

    double prob(int r, int g, int b) const;
    double prob_at(const BinIndex& bin) const {
        return probs_[flat(bin)];
    }
    std::uint64_t count_at(const BinIndex& bin) const { return counts_[flat(bin)]; }

    std::uint64_t total() const { return total_; }
    bool normalized() const { return total_ > 0; }
    const std::vector<double>& probs() const { return probs_; }

    // Binary model file: magic "VFBM", version u8 = 1, u32 bins_per_axis,
    // u64 total, then 32768 little-endian f64 probabilities, row-major (r,g,b).
    void save(const std::string& path) const;
    static ColorModel3D load(const std::string& path);

private:
    static std::size_t flat(const BinIndex& bin) {
        return (static_cast<std::size_t>(bin.r) * kBinsPerAxis + bin.g) * kBinsPerAxis +
               bin.b;
    }

    std::vector<std::uint64_t> counts_;
    std::vector<double> probs_;
    std::uint64_t total_ = 0;
};

// Builds a model from every pixel of the stream; the result is normalized
// unless the stream is empty.
ColorModel3D build_model(const std::vector<std::array<int, 3>>& pixels);
ColorModel3D build_model_from_images(const std::vector<std::string>& image_paths);

inline constexpr std::uint64_t kExtendPixelTarget = 1'000'000;

// Adds every corpus pixel whose blood probability under (blood_model,
// nonblood_model) is at least accept_threshold, stopping once the model holds
// kExtendPixelTarget pixels. Unreadable images are skipped with a warning.
ColorModel3D extend_model(const ColorModel3D& model, const ColorModel3D& blood_model,
                          const ColorModel3D& nonblood_model,
                          const std::vector<std::string>& image_paths,
                          double accept_threshold = 0.9);

// Pb / (Pb + Pn); 0.0 when both are zero.
double blood_probability(int r, int g, int b, const ColorModel3D& blood_model,
                         const ColorModel3D& nonblood_model);

struct BloodProbabilityMap {
    int width = 0;
    int height = 0;
    std::vector<double> p;  // row-major, each entry in [0,1]

    double at(int x, int y) const {
        return p[static_cast<std::size_t>(y) * width + x];
    }
};

BloodProbabilityMap compute_bpm(const Image& frame, const ColorModel3D& blood_model,
                                const ColorModel3D& nonblood_model);

struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> m;  // 1 = blood

    bool at(int x, int y) const {
        return m[static_cast<std::size_t>(y) * width + x] != 0;
    }
};

// mask[i] = (p[i] >= threshold)
BinaryMask binarize_bpm(const BloodProbabilityMap& bpm, double threshold);

struct Component {
    long area = 0;
    int min_x = 0, min_y = 0, max_x = 0, max_y = 0;  // inclusive bbox
    double centroid_x = 0.0, centroid_y = 0.0;
    long perimeter = 0;  // boundary pixel-edges
};

// 4-connectivity labeling, components sorted by area descending (stable).
std::vector<Component> connected_components(const BinaryMask& mask);

inline constexpr int kBloodFeatureDim = 14;

// The 14 blood feature fields, in order:
//  (1) blood ratio              (2) mean blood probability
//  (3) variance of probability  (4) max blood probability
//  (5) mean prob over mask / mean prob overall (0 if undefined)
//  (6) largest component area / image area
//  (7) second-largest component area / image area
//  (8) component count / (image area / 1000)
//  (9) largest-component bounding-box fill ratio
// (10) largest-component centroid x / width
// (11) largest-component centroid y / height
// (12) largest-component perimeter^2 / (4*pi*area), 0 if no component
// (13) variance of per-row blood ratios
// (14) variance of per-column blood ratios
FeatureVector blood_feature(const Image& frame, const ColorModel3D& blood_model,
                            const ColorModel3D& nonblood_model, double threshold = 0.5);

}  // namespace vsd::blood
