#pragma once

#include <string>

#include "splat2d/image.hpp"

namespace splat2d {

/// PSNR reported for identical images.
inline constexpr double kPsnrIdentical = 99.0;

struct QualityReport {
    double psnr = 0.0; ///< dB, peak 1.0
    double ssim = 0.0;
    double l1 = 0.0;
    double mse = 0.0;

    static std::string csv_header() { return "psnr,ssim,l1,mse"; }
    std::string csv_row() const;
};

double mse(const Image& a, const Image& b);
double l1(const Image& a, const Image& b);
double psnr(const Image& a, const Image& b);

/// Mean SSIM over valid 11x11 windows (Gaussian, sigma 1.5, k1 0.01, k2 0.03,
/// dynamic range 1), per channel then averaged. Needs min(width, height) >= 11.
double ssim(const Image& a, const Image& b);

QualityReport evaluate(const Image& rendered, const Image& target);

} // namespace splat2d
