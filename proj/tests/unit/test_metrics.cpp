#include <doctest.h>

#include <cmath>

#include "splat2d/metrics.hpp"

using namespace splat2d;

TEST_CASE("psnr examples") {
    const Image zero(16, 16, 0.0), one(16, 16, 1.0), half(16, 16, 0.5);
    CHECK(psnr(zero, zero) == 99.0);
    CHECK(psnr(zero, one) == doctest::Approx(0.0));
    CHECK(psnr(zero, half) == doctest::Approx(6.0206).epsilon(1e-5));
    CHECK(mse(zero, half) == 0.25);
    CHECK(l1(zero, half) == 0.5);
    CHECK_THROWS(psnr(zero, Image(8, 16)));
}

TEST_CASE("psnr symmetric") {
    Image a(12, 12), b(12, 12);
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        a.data()[i] = std::fmod(i * 0.37, 1.0);
        b.data()[i] = std::fmod(i * 0.11, 1.0);
    }
    CHECK(psnr(a, b) == psnr(b, a));
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)));
}

TEST_CASE("ssim examples") {
    Image a(16, 16), inv(16, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
            for (int c = 0; c < 3; ++c) {
                a.at(x, y, c) = (x + y) % 2;
                inv.at(x, y, c) = 1.0 - a.at(x, y, c);
            }
    CHECK(ssim(a, a) == doctest::Approx(1.0));
    const double s = ssim(a, inv);
    CHECK(s < 0.0);
    CHECK(s >= -1.0);

    const double c1 = 0.2, c2 = 0.7, k1 = 1e-4, k2 = 9e-4;
    const double expect = (2 * c1 * c2 + k1) * k2 / ((c1 * c1 + c2 * c2 + k1) * k2);
    CHECK(ssim(Image(20, 20, c1), Image(20, 20, c2)) == doctest::Approx(expect).epsilon(1e-10));
    CHECK_THROWS(ssim(Image(10, 20), Image(10, 20)));
}

TEST_CASE("quality report row") {
    const auto q = evaluate(Image(16, 16, 0.0), Image(16, 16, 0.5));
    CHECK(QualityReport::csv_header() == "psnr,ssim,l1,mse");
    CHECK(q.csv_row().find("0.25") != std::string::npos);
}
