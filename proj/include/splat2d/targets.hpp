#pragma once

#include <cstdint>
#include <string_view>

#include "splat2d/image.hpp"

namespace splat2d {

enum class TargetKind { Checker, RadialGradient, HfNoise, Stripes, Mixed };

TargetKind parse_target_kind(std::string_view name);
std::string_view to_string(TargetKind kind);

struct TargetSpec {
    TargetKind kind = TargetKind::Mixed;
    int width = 128;
    int height = 128;
    std::uint64_t seed = 0;
};

/// Counter-based hash of (seed, x, y, channel) mapped to [0, 1).
double hash_unit(std::uint64_t seed, std::uint64_t x, std::uint64_t y, std::uint64_t channel);

/// Deterministic synthetic image. Throws std::invalid_argument when either
/// side is below 16 pixels.
///
/// `mixed` lays four detail patches (checker, stripes, low-contrast noise and
/// a hard-edged disc) over a smooth colour ramp: large flat areas that a few
/// broad splats cover, and fine structure that needs many small ones.
Image generate(const TargetSpec& spec);

} // namespace splat2d
