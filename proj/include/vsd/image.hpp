#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vsd/errors.hpp"

namespace vsd {

// Interleaved 8-bit RGB image.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // width*height*3, row-major

    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
    const std::uint8_t* pixel(int x, int y) const {
        return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x);
    }
};

// PPM P6, 8-bit maxval only. Throws FormatError on anything else.
Image read_ppm(const std::string& path);
void write_ppm(const std::string& path, const Image& image);

}  // namespace vsd
