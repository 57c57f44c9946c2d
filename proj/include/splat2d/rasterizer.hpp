#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "splat2d/core.hpp"
#include "splat2d/grad_stats.hpp"
#include "splat2d/image.hpp"

namespace splat2d {

enum class LossKind { L1, MSE };

LossKind parse_loss_kind(std::string_view name);
std::string_view to_string(LossKind kind);

struct RasterOptions {
    /// Density cutoff: a splat whose Gaussian value at a pixel centre is below
    /// this does not contribute there.
    double min_density = 1.0 / 255.0;
    /// Compositing at a pixel stops once transmittance drops below this.
    double min_transmittance = 1e-4;
    /// 1 selects the deterministic single-threaded reference path.
    int threads = 1;
    int tile_size = 16;
};

/// One (Gaussian, pixel) term of the compositing sum.
struct PixelContribution {
    std::size_t gaussian_index = 0;
    int x = 0;
    int y = 0;
    double density = 0.0;       ///< Gaussian value at the pixel centre
    double alpha = 0.0;         ///< opacity * density
    double transmittance = 1.0; ///< light remaining before this term
};

struct PixelTrace {
    std::vector<PixelContribution> contributions; ///< front to back
    double final_transmittance = 1.0;
};

struct GaussianGrad {
    Vec2 mu;
    Vec2 log_scale;
    double rotation = 0.0;
    double logit_opacity = 0.0;
    Rgb color{0.0, 0.0, 0.0};
};

using ParamGrads = std::vector<GaussianGrad>;

/// dL/dmu of one Gaussian restricted to one pixel.
struct PixelSubgradient {
    std::size_t gaussian_index = 0;
    int x = 0;
    int y = 0;
    Vec2 grad;
};

/// Where backward sends per-pixel positional subgradients.
struct SubgradientSinks {
    /// Folded in during the sweep; backward closes the step with finish_step().
    GradStats* stats = nullptr;
    /// Per-axis factor applied to subgradients before they reach `stats`.
    Vec2 stats_scale{1.0, 1.0};
    /// Debug: materialize every subgradient (pixel units, unscaled).
    std::vector<PixelSubgradient>* stream = nullptr;
};

/// Contributions recorded by render() so that backward can skip
/// re-evaluating every splat. Only valid for the scene and options that
/// produced it.
struct ForwardTrace {
    struct Entry {
        std::uint16_t x;
        std::uint16_t y;
        double density;
        double transmittance; ///< before this splat
    };
    /// Rows [row_begin, row_end); splat at compositing position k owns
    /// entries[offsets[k], offsets[k + 1]).
    struct Band {
        int row_begin = 0;
        int row_end = 0;
        std::vector<std::uint32_t> offsets;
        std::vector<Entry> entries;
    };
    int width = 0;
    int height = 0;
    std::vector<std::size_t> order; ///< compositing order
    std::vector<Band> bands;
    std::vector<double> final_transmittance;
};

struct BackwardResult {
    ParamGrads grads;
    double loss = 0.0;
};

class RasterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Alpha-composite the scene front to back at every pixel centre.
Image render(const Scene& scene, int width, int height, const RasterOptions& options = {},
             ForwardTrace* trace = nullptr);

/// Mean over pixels and channels of |r - t| (L1) or (r - t)^2 (MSE).
double compute_loss(const Image& rendered, const Image& target, LossKind kind);

/// Analytic gradient of compute_loss(render(scene), target) with respect to
/// every Gaussian parameter. `rendered` must come from render() on this scene
/// with the same options; `trace`, when given, must come from that same call.
BackwardResult render_backward(const Scene& scene, const Image& rendered, const Image& target, LossKind kind,
                               const RasterOptions& options = {}, const SubgradientSinks& sinks = {},
                               const ForwardTrace* trace = nullptr);

/// The contribution list of a single pixel, as render() composites it.
PixelTrace trace_pixel(const Scene& scene, int width, int height, int x, int y, const RasterOptions& options = {});

} // namespace splat2d
