#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "splat2d/core.hpp"
#include "splat2d/image.hpp"
#include "splat2d/rasterizer.hpp"
#include "splat2d/rng.hpp"
#include "splat2d/vmf.hpp"

namespace splat2d {

/// Random scene of 1..max_gaussians splats inside a width x height viewport,
/// scales between 1.5 and 5 pixels.
Scene random_scene(int width, int height, int max_gaussians, Rng& rng);

/// Uniform random image.
Image random_image(int width, int height, Rng& rng);

inline constexpr int kParamsPerGaussian = 9;

/// Parameter k of a Gaussian in the order mu (2), log_scale (2), rotation,
/// logit_opacity, color (3).
double& parameter(Gaussian2D& g, int k);
double parameter(const GaussianGrad& g, int k);

struct GradientCheck {
    int scenes = 0;
    std::size_t parameters = 0;
    double max_relative_error = 0.0;   ///< |analytic - numeric| / max(|numeric|, 1e-6)
    double max_subgradient_error = 0.0; ///< per-pixel mu subgradients vs total, relative
};

/// Central finite differences against render_backward on random scenes.
/// Cutoffs are disabled so the loss is smooth in every parameter.
GradientCheck gradient_check(int scenes, int width, int height, LossKind kind, double h, std::uint64_t seed);

struct VmfCheckRow {
    double kappa = 0.0;
    vmf::ConsistencyCheck check;
};

std::vector<VmfCheckRow> vmf_check(const std::vector<double>& kappas, int samples, std::uint64_t seed);

} // namespace splat2d
