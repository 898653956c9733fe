#include "vsd/image.hpp"

#include <fstream>

namespace vsd {

namespace {

// Reads the next whitespace-delimited token, skipping '#' comments.
std::string next_token(std::istream& in) {
    std::string token;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!token.empty()) return token;
            continue;
        }
        token.push_back(static_cast<char>(c));
    }
    return token;
}

int parse_header_int(std::istream& in, const std::string& path, const char* what) {
    const std::string tok = next_token(in);
    try {
        std::size_t pos = 0;
        const int value = std::stoi(tok, &pos);
        if (pos != tok.size() || value < 0) throw std::invalid_argument(tok);
        return value;
    } catch (const std::exception&) {
        throw FormatError(path + ": bad PPM " + what + " field");
    }
}

}  // namespace

Image read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError(path + ": cannot open");
    if (next_token(in) != "P6")
        throw FormatError(path + ": not a P6 PPM");
    Image img;
    img.width = parse_header_int(in, path, "width");
    img.height = parse_header_int(in, path, "height");
    const int maxval = parse_header_int(in, path, "maxval");
    if (maxval != 255)
        throw FormatError(path + ": only 8-bit PPM supported");
    if (img.width <= 0 || img.height <= 0)
        throw FormatError(path + ": zero-dimension image");
    // single whitespace byte separates header from raster
    img.rgb.resize(img.pixel_count() * 3);
    in.read(reinterpret_cast<char*>(img.rgb.data()),
            static_cast<std::streamsize>(img.rgb.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.rgb.size()))
        throw FormatError(path + ": truncated raster");
    return img;
}

void write_ppm(const std::string& path, const Image& image) {
    if (image.width <= 0 || image.height <= 0 ||
        image.rgb.size() != image.pixel_count() * 3)
        throw std::invalid_argument("write_ppm: inconsistent image");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw FormatError(path + ": cannot open for writing");
    out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.rgb.data()),
              static_cast<std::streamsize>(image.rgb.size()));
    if (!out)
        throw FormatError(path + ": write failed");
}

}  // namespace vsd
