#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "splat2d/core.hpp"

namespace splat2d {

/// Row-major RGB float image. Channel values are nominally in [0, 1].
class Image {
public:
    Image() = default;
    Image(int width, int height, double fill = 0.0);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
    bool empty() const { return data_.empty(); }

    double& at(int x, int y, int c) { return data_[index(x, y, c)]; }
    double at(int x, int y, int c) const { return data_[index(x, y, c)]; }
    Rgb pixel(int x, int y) const;
    void set_pixel(int x, int y, const Rgb& rgb);

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Image& o) const { return width_ == o.width_ && height_ == o.height_; }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * width_ + x) * 3 + c;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

class ImageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Binary P6, maxval 255. Channels map as round(clamp(v, 0, 1) * 255).
void write_ppm(const std::filesystem::path& path, const Image& image);
Image read_ppm(const std::filesystem::path& path);

std::vector<unsigned char> encode_ppm(const Image& image);
Image decode_ppm(const std::vector<unsigned char>& bytes);

/// Quantize to the 8-bit grid PPM can represent.
Image quantize_8bit(const Image& image);

} // namespace splat2d
