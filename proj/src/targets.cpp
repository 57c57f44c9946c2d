#include "splat2d/targets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace splat2d {

TargetKind parse_target_kind(std::string_view name) {
    if (name == "checker") return TargetKind::Checker;
    if (name == "radial_gradient") return TargetKind::RadialGradient;
    if (name == "hf_noise") return TargetKind::HfNoise;
    if (name == "stripes") return TargetKind::Stripes;
    if (name == "mixed") return TargetKind::Mixed;
    throw std::invalid_argument("unknown target kind '" + std::string(name) + "'");
}

std::string_view to_string(TargetKind kind) {
    switch (kind) {
    case TargetKind::Checker: return "checker";
    case TargetKind::RadialGradient: return "radial_gradient";
    case TargetKind::HfNoise: return "hf_noise";
    case TargetKind::Stripes: return "stripes";
    case TargetKind::Mixed: return "mixed";
    }
    return "unknown";
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
    return {a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t};
}

// Distance from the centre normalized so the corners sit at 1.
double radial(int x, int y, int w, int h) {
    const double dx = (x + 0.5) - 0.5 * w;
    const double dy = (y + 0.5) - 0.5 * h;
    return std::sqrt((dx * dx + dy * dy) / (0.25 * (static_cast<double>(w) * w + static_cast<double>(h) * h)));
}

int checker_cell(int w, int h) { return std::max(2, std::min(w, h) / 4); }

Rgb mixed_pixel(int x, int y, int w, int h, std::uint64_t seed) {
    // Smooth base.
    const double fx = (x + 0.5) / w;
    const double fy = (y + 0.5) / h;
    Rgb c{0.25 + 0.5 * fx, 0.35 + 0.3 * fy, 0.55 - 0.25 * radial(x, y, w, h)};

    const int pw = w / 4;
    const int ph = h / 4;
    auto in_patch = [&](int px, int py) { return x >= px && x < px + pw && y >= py && y < py + ph; };
    const int left = w / 8, right = 5 * w / 8, top = h / 8, bottom = 5 * h / 8;

    if (in_patch(left, top)) {
        const int cell = std::max(2, w / 16);
        const bool on = (((x - left) / cell) + ((y - top) / cell)) % 2 == 0;
        c = on ? Rgb{0.7, 0.65, 0.6} : Rgb{0.3, 0.35, 0.4};
    } else if (in_patch(right, top)) {
        const int period = std::max(4, w / 8);
        const bool on = ((x - right) % period) < period / 2;
        c = on ? Rgb{0.85, 0.3, 0.25} : Rgb{0.3, 0.3, 0.6};
    } else if (in_patch(left, bottom)) {
        const Rgb mid{0.5, 0.55, 0.45};
        for (int k = 0; k < 3; ++k) c[k] = mid[k] + 0.2 * (hash_unit(seed, x, y, k) - 0.5);
    } else if (in_patch(right, bottom)) {
        const double dx = (x + 0.5) - (right + 0.5 * pw);
        const double dy = (y + 0.5) - (bottom + 0.5 * ph);
        const double r2 = dx * dx + dy * dy;
        const double outer = 0.4 * pw;
        const double inner = 0.2 * pw;
        if (r2 < inner * inner) c = {0.95, 0.9, 0.2};
        else if (r2 < outer * outer) c = {0.1, 0.5, 0.2};
    }
    return c;
}

} // namespace

double hash_unit(std::uint64_t seed, std::uint64_t x, std::uint64_t y, std::uint64_t channel) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ x);
    h = splitmix64(h ^ (y << 20));
    h = splitmix64(h ^ (channel << 40));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

Image generate(const TargetSpec& spec) {
    if (spec.width < 16 || spec.height < 16) throw std::invalid_argument("target: width and height must be >= 16");
    const int w = spec.width;
    const int h = spec.height;
    Image image(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            Rgb c{};
            switch (spec.kind) {
            case TargetKind::Checker: {
                const int cell = checker_cell(w, h);
                const double v = ((x / cell) + (y / cell)) % 2 == 0 ? 0.0 : 1.0;
                c = {v, v, v};
                break;
            }
            case TargetKind::RadialGradient:
                c = lerp({0.9, 0.6, 0.3}, {0.1, 0.2, 0.7}, std::min(1.0, radial(x, y, w, h)));
                break;
            case TargetKind::HfNoise:
                for (int k = 0; k < 3; ++k) c[k] = hash_unit(spec.seed, x, y, k);
                break;
            case TargetKind::Stripes: {
                const double v = ((x + y) / 4) % 2 == 0 ? 0.1 : 0.9;
                c = {v, v, v};
                break;
            }
            case TargetKind::Mixed:
                c = mixed_pixel(x, y, w, h, spec.seed);
                break;
            }
            for (double& v : c) v = std::clamp(v, 0.0, 1.0);
            image.set_pixel(x, y, c);
        }
    }
    return image;
}

} // namespace splat2d
