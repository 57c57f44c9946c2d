#include <doctest.h>

#include "splat2d/targets.hpp"

using namespace splat2d;

TEST_CASE("checker cells") {
    const Image img = generate({TargetKind::Checker, 16, 16, 0});
    CHECK(img.pixel(0, 0) == Rgb{0.0, 0.0, 0.0});
    CHECK(img.pixel(4, 0) == Rgb{1.0, 1.0, 1.0});
    CHECK(img.pixel(4, 4) == Rgb{0.0, 0.0, 0.0});
}

TEST_CASE("targets are deterministic and in range") {
    for (auto kind : {TargetKind::Checker, TargetKind::RadialGradient, TargetKind::HfNoise, TargetKind::Stripes,
                      TargetKind::Mixed}) {
        const TargetSpec spec{kind, 40, 24, 9};
        const Image a = generate(spec);
        CHECK(a == generate(spec));
        for (double v : a.data()) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        CHECK(parse_target_kind(to_string(kind)) == kind);
    }
    CHECK_THROWS(parse_target_kind("plaid"));
    CHECK_THROWS(generate({TargetKind::Mixed, 15, 32, 0}));
}

TEST_CASE("noise depends on seed") {
    const Image a = generate({TargetKind::HfNoise, 32, 32, 1});
    const Image b = generate({TargetKind::HfNoise, 32, 32, 2});
    int differ = 0;
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) differ += a.pixel(x, y) != b.pixel(x, y);
    CHECK(differ >= 32 * 32 / 10);
}

TEST_CASE("mixed target has flat and detailed regions") {
    const Image m = generate({TargetKind::Mixed, 128, 128, 0});
    // smooth base away from the patches
    CHECK(std::abs(m.at(2, 2, 0) - m.at(3, 2, 0)) < 0.01);
    // checker patch
    CHECK(m.pixel(16, 16) != m.pixel(24, 16));
    // disc centre
    CHECK(m.pixel(96, 96) == Rgb{0.95, 0.9, 0.2});
}

TEST_CASE("hash unit range") {
    for (std::uint64_t i = 0; i < 1000; ++i) {
        const double v = hash_unit(i, i * 3, i * 7, i % 3);
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
    CHECK(hash_unit(1, 2, 3, 0) == hash_unit(1, 2, 3, 0));
    CHECK(hash_unit(1, 2, 3, 0) != hash_unit(1, 3, 2, 0));
}
