#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "splat2d/core.hpp"
#include "splat2d/rasterizer.hpp"

namespace splat2d {

/// Per-group learning rates. Position decays exponentially from
/// position_init to position_final over position_max_steps.
struct LearningRates {
    double position_init = 1.6e-4 * 128.0;
    double position_final = 1.6e-6 * 128.0;
    int position_max_steps = 5000;
    double log_scale = 5e-3;
    double rotation = 1e-3;
    double opacity = 0.05;
    double color = 2.5e-3;
};

double lr_pos(const LearningRates& rates, int iteration);

/// Adam over the nine scalars of every Gaussian.
///
/// Layout per Gaussian: mu.x, mu.y, log_scale.x, log_scale.y, rotation,
/// logit_opacity, r, g, b. Colors are clamped to [0, 1] after each update.
class AdamOptimizer {
public:
    static constexpr std::size_t kParams = 9;
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEpsilon = 1e-15;

    using Moments = std::array<double, kParams>;

    explicit AdamOptimizer(const LearningRates& rates = {}, std::size_t n = 0);

    void step(std::span<Gaussian2D> params, std::span<const GaussianGrad> grads, int iteration);

    /// index_map[new] = old slot, or -1 for a new Gaussian with zero moments.
    void resize_for_mutation(std::span<const std::ptrdiff_t> index_map);

    void reset_opacity_moments();

    std::size_t size() const { return m_.size(); }
    std::int64_t step_count() const { return t_; }
    const Moments& first_moment(std::size_t i) const { return m_.at(i); }
    const Moments& second_moment(std::size_t i) const { return v_.at(i); }
    const LearningRates& rates() const { return rates_; }

private:
    LearningRates rates_;
    std::vector<Moments> m_;
    std::vector<Moments> v_;
    std::int64_t t_ = 0;
};

} // namespace splat2d
