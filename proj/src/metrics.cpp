#include "splat2d/metrics.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace splat2d {

namespace {

void require_same_shape(const Image& a, const Image& b, const char* what) {
    if (!a.same_shape(b)) throw std::invalid_argument(std::string(what) + ": image dimension mismatch");
}

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::array<double, kWindow> gaussian_kernel() {
    std::array<double, kWindow> k{};
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - kWindow / 2;
        k[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

/// Valid-region separable blur of a width x height plane.
std::vector<double> blur_valid(const std::vector<double>& plane, int width, int height,
                               const std::array<double, kWindow>& k) {
    const int ow = width - kWindow + 1;
    const int oh = height - kWindow + 1;
    std::vector<double> rows(static_cast<std::size_t>(ow) * height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < kWindow; ++i) s += k[i] * plane[static_cast<std::size_t>(y) * width + x + i];
            rows[static_cast<std::size_t>(y) * ow + x] = s;
        }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < kWindow; ++i) s += k[i] * rows[static_cast<std::size_t>(y + i) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = s;
        }
    return out;
}

std::string fmt(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

} // namespace

std::string QualityReport::csv_row() const { return fmt(psnr) + "," + fmt(ssim) + "," + fmt(l1) + "," + fmt(mse); }

double mse(const Image& a, const Image& b) {
    require_same_shape(a, b, "mse");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        sum += d * d;
    }
    return a.empty() ? 0.0 : sum / static_cast<double>(a.data().size());
}

double l1(const Image& a, const Image& b) {
    require_same_shape(a, b, "l1");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) sum += std::abs(a.data()[i] - b.data()[i]);
    return a.empty() ? 0.0 : sum / static_cast<double>(a.data().size());
}

double psnr(const Image& a, const Image& b) {
    const double m = mse(a, b);
    if (m == 0.0) return kPsnrIdentical;
    return 10.0 * std::log10(1.0 / m);
}

double ssim(const Image& a, const Image& b) {
    require_same_shape(a, b, "ssim");
    const int w = a.width();
    const int h = a.height();
    if (std::min(w, h) < kWindow) throw std::invalid_argument("ssim: image must be at least 11x11");

    const auto kernel = gaussian_kernel();
    const std::size_t n = a.pixel_count();
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> pa(n), pb(n), paa(n), pbb(n), pab(n);
        for (std::size_t i = 0; i < n; ++i) {
            pa[i] = a.data()[i * 3 + c];
            pb[i] = b.data()[i * 3 + c];
            paa[i] = pa[i] * pa[i];
            pbb[i] = pb[i] * pb[i];
            pab[i] = pa[i] * pb[i];
        }
        const auto mu_a = blur_valid(pa, w, h, kernel);
        const auto mu_b = blur_valid(pb, w, h, kernel);
        const auto e_aa = blur_valid(paa, w, h, kernel);
        const auto e_bb = blur_valid(pbb, w, h, kernel);
        const auto e_ab = blur_valid(pab, w, h, kernel);

        double sum = 0.0;
        for (std::size_t i = 0; i < mu_a.size(); ++i) {
            const double ma = mu_a[i], mb = mu_b[i];
            const double var_a = e_aa[i] - ma * ma;
            const double var_b = e_bb[i] - mb * mb;
            const double cov = e_ab[i] - ma * mb;
            sum += ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) /
                   ((ma * ma + mb * mb + kC1) * (var_a + var_b + kC2));
        }
        total += sum / static_cast<double>(mu_a.size());
    }
    return total / 3.0;
}

QualityReport evaluate(const Image& rendered, const Image& target) {
    return {psnr(rendered, target), ssim(rendered, target), l1(rendered, target), mse(rendered, target)};
}

} // namespace splat2d
