#include "splat2d/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

namespace splat2d {

Image::Image(int width, int height, double fill) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw ImageError("negative image dimensions");
    data_.assign(static_cast<std::size_t>(width) * height * 3, fill);
}

Rgb Image::pixel(int x, int y) const {
    const std::size_t i = index(x, y, 0);
    return {data_[i], data_[i + 1], data_[i + 2]};
}

void Image::set_pixel(int x, int y, const Rgb& rgb) {
    const std::size_t i = index(x, y, 0);
    data_[i] = rgb[0];
    data_[i + 1] = rgb[1];
    data_[i + 2] = rgb[2];
}

namespace {

unsigned char to_byte(double v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

class HeaderReader {
public:
    explicit HeaderReader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

    std::string token() {
        skip_space_and_comments();
        std::string out;
        while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) out.push_back(static_cast<char>(bytes_[pos_++]));
        if (out.empty()) throw ImageError("ppm: truncated header");
        return out;
    }

    int integer() {
        const std::string t = token();
        if (!std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            throw ImageError("ppm: expected integer, got '" + t + "'");
        if (t.size() > 9) throw ImageError("ppm: header value too large");
        return std::stoi(t);
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_start() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw ImageError("ppm: missing raster separator");
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<unsigned char>& bytes_;
    std::size_t pos_ = 0;
};

} // namespace

std::vector<unsigned char> encode_ppm(const Image& image) {
    const std::string header =
        "P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
    std::vector<unsigned char> out(header.begin(), header.end());
    out.reserve(out.size() + image.data().size());
    for (double v : image.data()) out.push_back(to_byte(v));
    return out;
}

Image decode_ppm(const std::vector<unsigned char>& bytes) {
    HeaderReader reader(bytes);
    if (reader.token() != "P6") throw ImageError("ppm: only binary P6 is supported");
    const int width = reader.integer();
    const int height = reader.integer();
    const int maxval = reader.integer();
    if (width < 1 || height < 1) throw ImageError("ppm: invalid dimensions");
    if (maxval < 1 || maxval > 255) throw ImageError("ppm: maxval must be in [1, 255]");
    const std::size_t start = reader.raster_start();
    const std::size_t needed = static_cast<std::size_t>(width) * height * 3;
    if (bytes.size() < start + needed) throw ImageError("ppm: truncated raster");

    Image image(width, height);
    auto& data = image.data();
    for (std::size_t i = 0; i < needed; ++i) data[i] = static_cast<double>(bytes[start + i]) / maxval;
    return image;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
    const auto bytes = encode_ppm(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ImageError("failed writing " + path.string());
}

Image read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageError("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_ppm(bytes);
    } catch (const ImageError& e) {
        throw ImageError(path.string() + ": " + e.what());
    }
}

Image quantize_8bit(const Image& image) {
    Image out = image;
    for (double& v : out.data()) v = to_byte(v) / 255.0;
    return out;
}

} // namespace splat2d
