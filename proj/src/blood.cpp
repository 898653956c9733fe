#include "vsd/blood.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace vsd::blood {

BinIndex bin_of(int r, int g, int b) {
    for (int c : {r, g, b})
        if (c < 0 || c > 255)
            throw std::invalid_argument("bin_of: component outside [0,255]");
    return {r / kBinWidth, g / kBinWidth, b / kBinWidth};
}

ColorModel3D::ColorModel3D()
    : counts_(kTotalBins, 0), probs_(kTotalBins, 0.0) {}

void ColorModel3D::add_pixel(int r, int g, int b) {
    ++counts_[flat(bin_of(r, g, b))];
    ++total_;
}

void ColorModel3D::normalize() {
    if (total_ == 0) {
        std::fill(probs_.begin(), probs_.end(), 0.0);
        return;
    }
    const double inv = 1.0 / static_cast<double>(total_);
    for (int i = 0; i < kTotalBins; ++i)
        probs_[i] = static_cast<double>(counts_[i]) * inv;
}

double ColorModel3D::prob(int r, int g, int b) const {
    return probs_[flat(bin_of(r, g, b))];
}

namespace {

constexpr char kModelMagic[4] = {'V', 'F', 'B', 'M'};
constexpr std::uint8_t kModelVersion = 1;

template <typename T>
void write_le(std::ostream& out, T value) {
    char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i)
        bytes[i] = static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff);
    out.write(bytes, sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const std::string& path) {
    char bytes[sizeof(T)];
    in.read(bytes, sizeof(T));
    if (in.gcount() != sizeof(T))
        throw FormatError(path + ": truncated model file");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes[i])) << (8 * i);
    return static_cast<T>(v);
}

}  // namespace

void ColorModel3D::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw FormatError(path + ": cannot open for writing");
    out.write(kModelMagic, 4);
    out.put(static_cast<char>(kModelVersion));
    write_le<std::uint32_t>(out, kBinsPerAxis);
    write_le<std::uint64_t>(out, total_);
    for (double p : probs_) {
        std::uint64_t bits;
        std::memcpy(&bits, &p, sizeof(bits));
        write_le<std::uint64_t>(out, bits);
    }
    if (!out)
        throw FormatError(path + ": write failed");
}

ColorModel3D ColorModel3D::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError(path + ": cannot open");
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, kModelMagic, 4) != 0)
        throw FormatError(path + ": bad magic, not a blood model file");
    const int version = in.get();
    if (version != kModelVersion)
        throw FormatError(path + ": unsupported model version");
    const auto bins = read_le<std::uint32_t>(in, path);
    if (bins != kBinsPerAxis)
        throw FormatError(path + ": unexpected bins_per_axis");
    ColorModel3D model;
    model.total_ = read_le<std::uint64_t>(in, path);
    for (int i = 0; i < kTotalBins; ++i) {
        const std::uint64_t bits = read_le<std::uint64_t>(in, path);
        double p;
        std::memcpy(&p, &bits, sizeof(p));
        model.probs_[i] = p;
    }
    // counts are not stored; reconstruct the expectation so that further
    // extension keeps relative masses
    for (int i = 0; i < kTotalBins; ++i)
        model.counts_[i] =
            static_cast<std::uint64_t>(std::llround(model.probs_[i] * model.total_));
    return model;
}

ColorModel3D build_model(const std::vector<std::array<int, 3>>& pixels) {
    ColorModel3D model;
    for (const auto& px : pixels)
        model.add_pixel(px[0], px[1], px[2]);
    model.normalize();
    return model;
}

ColorModel3D build_model_from_images(const std::vector<std::string>& image_paths) {
    ColorModel3D model;
    for (const std::string& path : image_paths) {
        Image img;
        try {
            img = read_ppm(path);
        } catch (const FormatError& e) {
            warn(std::string("skipping unreadable image: ") + e.what());
            continue;
        }
        for (std::size_t i = 0; i < img.pixel_count(); ++i)
            model.add_pixel(img.rgb[3 * i], img.rgb[3 * i + 1], img.rgb[3 * i + 2]);
    }
    model.normalize();
    return model;
}

ColorModel3D extend_model(const ColorModel3D& model, const ColorModel3D& blood_model,
                          const ColorModel3D& nonblood_model,
                          const std::vector<std::string>& image_paths,
                          double accept_threshold) {
    if (!(accept_threshold > 0.0 && accept_threshold < 1.0))
        throw std::invalid_argument("extend_model: accept_threshold outside (0,1)");
    ColorModel3D out = model;
    for (const std::string& path : image_paths) {
        if (out.total() >= kExtendPixelTarget) break;
        Image img;
        try {
            img = read_ppm(path);
        } catch (const FormatError& e) {
            warn(std::string("skipping unreadable image: ") + e.what());
            continue;
        }
        for (std::size_t i = 0; i < img.pixel_count(); ++i) {
            if (out.total() >= kExtendPixelTarget) break;
            const int r = img.rgb[3 * i], g = img.rgb[3 * i + 1], b = img.rgb[3 * i + 2];
            if (blood_probability(r, g, b, blood_model, nonblood_model) >= accept_threshold)
                out.add_pixel(r, g, b);
        }
    }
    out.normalize();
    return out;
}

double blood_probability(int r, int g, int b, const ColorModel3D& blood_model,
                         const ColorModel3D& nonblood_model) {
    const BinIndex bin = bin_of(r, g, b);
    const double pb = blood_model.prob_at(bin);
    const double pn = nonblood_model.prob_at(bin);
    const double denom = pb + pn;
    return denom > 0.0 ? pb / denom : 0.0;
}

BloodProbabilityMap compute_bpm(const Image& frame, const ColorModel3D& blood_model,
                                const ColorModel3D& nonblood_model) {
    if (frame.width <= 0 || frame.height <= 0)
        throw std::invalid_argument("compute_bpm: zero-dimension image");
    BloodProbabilityMap bpm;
    bpm.width = frame.width;
    bpm.height = frame.height;
    bpm.p.resize(frame.pixel_count());
    for (std::size_t i = 0; i < frame.pixel_count(); ++i)
        bpm.p[i] = blood_probability(frame.rgb[3 * i], frame.rgb[3 * i + 1],
                                     frame.rgb[3 * i + 2], blood_model, nonblood_model);
    return bpm;
}

BinaryMask binarize_bpm(const BloodProbabilityMap& bpm, double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0))
        throw std::invalid_argument("binarize_bpm: threshold outside [0,1]");
    BinaryMask mask;
    mask.width = bpm.width;
    mask.height = bpm.height;
    mask.m.resize(bpm.p.size());
    for (std::size_t i = 0; i < bpm.p.size(); ++i)
        mask.m[i] = bpm.p[i] >= threshold ? 1 : 0;
    return mask;
}

std::vector<Component> connected_components(const BinaryMask& mask) {
    const int w = mask.width, h = mask.height;
    std::vector<Component> components;
    if (w <= 0 || h <= 0) return components;
    std::vector<std::uint8_t> visited(mask.m.size(), 0);
    std::vector<std::pair<int, int>> stack;
    for (int y0 = 0; y0 < h; ++y0) {
        for (int x0 = 0; x0 < w; ++x0) {
            const std::size_t idx0 = static_cast<std::size_t>(y0) * w + x0;
            if (!mask.m[idx0] || visited[idx0]) continue;
            Component comp;
            comp.min_x = comp.max_x = x0;
            comp.min_y = comp.max_y = y0;
            double sum_x = 0.0, sum_y = 0.0;
            visited[idx0] = 1;
            stack.clear();
            stack.emplace_back(x0, y0);
            while (!stack.empty()) {
                const auto [x, y] = stack.back();
                stack.pop_back();
                ++comp.area;
                sum_x += x;
                sum_y += y;
                comp.min_x = std::min(comp.min_x, x);
                comp.max_x = std::max(comp.max_x, x);
                comp.min_y = std::min(comp.min_y, y);
                comp.max_y = std::max(comp.max_y, y);
                constexpr int dx[4] = {1, -1, 0, 0};
                constexpr int dy[4] = {0, 0, 1, -1};
                for (int d = 0; d < 4; ++d) {
                    const int nx = x + dx[d], ny = y + dy[d];
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) {
                        ++comp.perimeter;  // image border counts as boundary
                        continue;
                    }
                    const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
                    if (!mask.m[nidx]) {
                        ++comp.perimeter;
                        continue;
                    }
                    if (!visited[nidx]) {
                        visited[nidx] = 1;
                        stack.emplace_back(nx, ny);
                    }
                }
            }
            comp.centroid_x = sum_x / static_cast<double>(comp.area);
            comp.centroid_y = sum_y / static_cast<double>(comp.area);
            components.push_back(comp);
        }
    }
    std::stable_sort(components.begin(), components.end(),
                     [](const Component& a, const Component& b) { return a.area > b.area; });
    return components;
}

namespace {

double variance(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return var / static_cast<double>(xs.size());
}

}  // namespace

FeatureVector blood_feature(const Image& frame, const ColorModel3D& blood_model,
                            const ColorModel3D& nonblood_model, double threshold) {
    const BloodProbabilityMap bpm = compute_bpm(frame, blood_model, nonblood_model);
    const BinaryMask mask = binarize_bpm(bpm, threshold);
    const std::vector<Component> comps = connected_components(mask);

    const int w = frame.width, h = frame.height;
    const double area = static_cast<double>(frame.pixel_count());

    long mask_count = 0;
    double prob_sum = 0.0, prob_max = 0.0, masked_prob_sum = 0.0;
    for (std::size_t i = 0; i < bpm.p.size(); ++i) {
        prob_sum += bpm.p[i];
        prob_max = std::max(prob_max, bpm.p[i]);
        if (mask.m[i]) {
            ++mask_count;
            masked_prob_sum += bpm.p[i];
        }
    }
    const double prob_mean = prob_sum / area;
    double prob_var = 0.0;
    for (double p : bpm.p) prob_var += (p - prob_mean) * (p - prob_mean);
    prob_var /= area;

    std::vector<double> row_ratio(static_cast<std::size_t>(h), 0.0);
    std::vector<double> col_ratio(static_cast<std::size_t>(w), 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (mask.at(x, y)) {
                row_ratio[y] += 1.0 / w;
                col_ratio[x] += 1.0 / h;
            }

    std::vector<double> f(kBloodFeatureDim, 0.0);
    f[0] = static_cast<double>(mask_count) / area;
    f[1] = prob_mean;
    f[2] = prob_var;
    f[3] = prob_max;
    if (mask_count > 0 && prob_mean > 0.0)
        f[4] = (masked_prob_sum / static_cast<double>(mask_count)) / prob_mean;
    if (!comps.empty()) {
        const Component& big = comps.front();
        f[5] = static_cast<double>(big.area) / area;
        if (comps.size() > 1)
            f[6] = static_cast<double>(comps[1].area) / area;
        const double bbox_area = static_cast<double>(big.max_x - big.min_x + 1) *
                                 static_cast<double>(big.max_y - big.min_y + 1);
        f[8] = static_cast<double>(big.area) / bbox_area;
        f[9] = big.centroid_x / w;
        f[10] = big.centroid_y / h;
        f[11] = static_cast<double>(big.perimeter) * static_cast<double>(big.perimeter) /
                (4.0 * std::numbers::pi * static_cast<double>(big.area));
    }
    f[7] = static_cast<double>(comps.size()) / (area / 1000.0);
    f[12] = variance(row_ratio);
    f[13] = variance(col_ratio);
    return FeatureVector(FeatureChannel::Blood, std::move(f));
}

}  // namespace vsd::blood
