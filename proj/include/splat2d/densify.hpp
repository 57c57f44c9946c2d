#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "splat2d/core.hpp"
#include "splat2d/grad_stats.hpp"
#include "splat2d/optim.hpp"
#include "splat2d/rng.hpp"

namespace splat2d {

enum class DensifyPolicy {
    Baseline,     ///< mean gradient norm, no weighting
    Abs,          ///< mean of per-pixel gradient norms (no cancellation)
    Gdags,        ///< coherence weight on both split and clone metrics
    GdagsSplit,   ///< weight on the split metric only
    GdagsClone,   ///< weight on the clone metric only
};

DensifyPolicy parse_policy(std::string_view name);
std::string_view to_string(DensifyPolicy policy);

struct DensifyConfig {
    DensifyPolicy policy = DensifyPolicy::Gdags;
    double weight_alpha = 0.8;
    double weight_beta = 25.0;
    double weight_p = 15.0;
    double tau_p = 0.0015;
    /// Gradient threshold for the Abs policy; <= 0 falls back to tau_p.
    double abs_tau_p = 0.0;
    /// Split/clone size gate on the largest decoded scale, in pixels.
    double tau_s = 1.28;
    double split_factor = 1.6;
    double opacity_prune_threshold = 0.005;
    double max_scale_limit = std::numeric_limits<double>::infinity();
    GcrScope gcr_scope = GcrScope::Global;

    /// Throws std::invalid_argument on an out-of-range field.
    void validate() const;
};

enum class DensifyAction : unsigned char { None, Split, Clone };

struct DecisionMetrics {
    double split = 0.0;
    double clone = 0.0;
};

struct DensifyReport {
    int iteration = 0;
    std::size_t n_split = 0;
    std::size_t n_clone = 0;
    std::size_t n_pruned = 0;
    std::size_t n_total_after = 0;
};

/// alpha + beta * (1 - gcr)^p
double weight(double gcr_value, const DensifyConfig& cfg);

/// (grad_norm * w, grad_norm / w). Throws std::invalid_argument for w <= 0.
DecisionMetrics decision_metrics(double grad_norm, double w);

/// Per-Gaussian decision from a snapshot of the statistics.
std::vector<DensifyAction> classify(const Scene& scene, const GradStats& stats, const DensifyConfig& cfg);

/// Two children drawn from the parent's density, scales divided by split_factor.
std::array<Gaussian2D, 2> split(const Gaussian2D& parent, double split_factor, Rng& rng);

/// Copy of g displaced by -lr_pos * mu_grad.
Gaussian2D clone(const Gaussian2D& g, const Vec2& mu_grad, double lr_pos);

struct PruneResult {
    std::vector<std::size_t> removed;
    std::vector<std::ptrdiff_t> index_map; ///< new slot -> old slot
};

/// Drop faint or oversized Gaussians, keeping survivors in order. Never
/// empties the scene: if everything qualifies, the most opaque one stays.
PruneResult prune(Scene& scene, const DensifyConfig& cfg);

struct RoundContext {
    int iteration = 0;
    double lr_pos = 0.0;
    /// Units of the accumulated statistics relative to pixels (per axis).
    Vec2 stats_scale{1.0, 1.0};
};

/// classify -> split/clone -> prune -> reset stats -> resize optimizer state.
/// Survivors keep their relative order; clones then split children are
/// appended in parent index order.
DensifyReport densify_round(Scene& scene, GradStats& stats, AdamOptimizer& optimizer, const DensifyConfig& cfg,
                            Rng& rng, const RoundContext& ctx);

/// Clamp every opacity to at most max_opacity and clear opacity moments.
void reset_opacity(Scene& scene, AdamOptimizer& optimizer, double max_opacity = 0.01);

} // namespace splat2d
