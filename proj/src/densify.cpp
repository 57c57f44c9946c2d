#include "splat2d/densify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace splat2d {

DensifyPolicy parse_policy(std::string_view name) {
    if (name == "baseline") return DensifyPolicy::Baseline;
    if (name == "abs") return DensifyPolicy::Abs;
    if (name == "gdags") return DensifyPolicy::Gdags;
    if (name == "gdags-s") return DensifyPolicy::GdagsSplit;
    if (name == "gdags-c") return DensifyPolicy::GdagsClone;
    throw std::invalid_argument("unknown densify policy '" + std::string(name) +
                                "' (expected baseline, abs, gdags, gdags-s or gdags-c)");
}

std::string_view to_string(DensifyPolicy policy) {
    switch (policy) {
    case DensifyPolicy::Baseline: return "baseline";
    case DensifyPolicy::Abs: return "abs";
    case DensifyPolicy::Gdags: return "gdags";
    case DensifyPolicy::GdagsSplit: return "gdags-s";
    case DensifyPolicy::GdagsClone: return "gdags-c";
    }
    return "unknown";
}

void DensifyConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("densify config: ") + what);
    };
    require(weight_alpha >= 0.0 && weight_alpha <= 1.0, "weight_alpha must be in [0, 1]");
    require(weight_beta > 0.0, "weight_beta must be > 0");
    require(weight_p >= 1.0, "weight_p must be >= 1");
    require(tau_p > 0.0, "tau_p must be > 0");
    require(tau_s > 0.0, "tau_s must be > 0");
    require(split_factor > 1.0, "split_factor must be > 1");
    require(opacity_prune_threshold > 0.0 && opacity_prune_threshold < 1.0,
            "opacity_prune_threshold must be in (0, 1)");
    require(max_scale_limit > 0.0, "max_scale_limit must be > 0");
}

double weight(double gcr_value, const DensifyConfig& cfg) {
    const double c = std::clamp(gcr_value, 0.0, 1.0);
    return cfg.weight_alpha + cfg.weight_beta * std::pow(1.0 - c, cfg.weight_p);
}

DecisionMetrics decision_metrics(double grad_norm, double w) {
    if (!(w > 0.0)) throw std::invalid_argument("decision_metrics: weight must be > 0");
    return {grad_norm * w, grad_norm / w};
}

std::vector<DensifyAction> classify(const Scene& scene, const GradStats& stats, const DensifyConfig& cfg) {
    if (stats.size() != scene.size()) throw std::invalid_argument("classify: stats not sized to scene");
    const DensifyPolicy p = cfg.policy;
    const bool weight_split = p == DensifyPolicy::Gdags || p == DensifyPolicy::GdagsSplit;
    const bool weight_clone = p == DensifyPolicy::Gdags || p == DensifyPolicy::GdagsClone;
    const double tau = (p == DensifyPolicy::Abs && cfg.abs_tau_p > 0.0) ? cfg.abs_tau_p : cfg.tau_p;

    std::vector<DensifyAction> actions(scene.size(), DensifyAction::None);
    for (std::size_t i = 0; i < scene.size(); ++i) {
        const double base = p == DensifyPolicy::Abs ? stats.abs_mean_grad_norm(i) : stats.mean_grad_norm(i);
        const double w = (weight_split || weight_clone) ? weight(stats.gcr(i, cfg.gcr_scope), cfg) : 1.0;
        const double split_metric = weight_split ? base * w : base;
        const double clone_metric = weight_clone ? base / w : base;
        if (scene.gaussians[i].max_scale() > cfg.tau_s) {
            if (split_metric > tau) actions[i] = DensifyAction::Split;
        } else if (clone_metric > tau) {
            actions[i] = DensifyAction::Clone;
        }
    }
    return actions;
}

std::array<Gaussian2D, 2> split(const Gaussian2D& parent, double split_factor, Rng& rng) {
    const double c = std::cos(parent.rotation);
    const double s = std::sin(parent.rotation);
    const Vec2 scale = parent.scale();
    const double shrink = std::log(split_factor);
    std::array<Gaussian2D, 2> children{parent, parent};
    for (Gaussian2D& child : children) {
        const double z0 = rng.normal() * scale.x;
        const double z1 = rng.normal() * scale.y;
        child.mu = parent.mu + Vec2{c * z0 - s * z1, s * z0 + c * z1};
        child.log_scale = parent.log_scale - Vec2{shrink, shrink};
    }
    return children;
}

Gaussian2D clone(const Gaussian2D& g, const Vec2& mu_grad, double lr_pos) {
    Gaussian2D copy = g;
    copy.mu -= mu_grad * lr_pos;
    return copy;
}

PruneResult prune(Scene& scene, const DensifyConfig& cfg) {
    PruneResult result;
    const std::size_t n = scene.size();
    std::vector<unsigned char> drop(n, 0);
    std::size_t n_drop = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Gaussian2D& g = scene.gaussians[i];
        if (g.opacity() < cfg.opacity_prune_threshold || g.max_scale() > cfg.max_scale_limit) {
            drop[i] = 1;
            ++n_drop;
        }
    }
    if (n > 0 && n_drop == n) {
        std::size_t keep = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (scene.gaussians[i].logit_opacity > scene.gaussians[keep].logit_opacity) keep = i;
        drop[keep] = 0;
    }

    std::vector<Gaussian2D> kept;
    kept.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (drop[i]) {
            result.removed.push_back(i);
        } else {
            kept.push_back(scene.gaussians[i]);
            result.index_map.push_back(static_cast<std::ptrdiff_t>(i));
        }
    }
    scene.gaussians = std::move(kept);
    return result;
}

DensifyReport densify_round(Scene& scene, GradStats& stats, AdamOptimizer& optimizer, const DensifyConfig& cfg,
                            Rng& rng, const RoundContext& ctx) {
    const std::size_t n = scene.size();
    if (optimizer.size() != n) throw std::invalid_argument("densify_round: optimizer state not sized to scene");
    const std::vector<DensifyAction> actions = classify(scene, stats, cfg);

    DensifyReport report;
    report.iteration = ctx.iteration;

    std::vector<Gaussian2D> next;
    std::vector<std::ptrdiff_t> map;
    next.reserve(n * 2);
    map.reserve(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
        if (actions[i] == DensifyAction::Split) continue;
        next.push_back(scene.gaussians[i]);
        map.push_back(static_cast<std::ptrdiff_t>(i));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (actions[i] != DensifyAction::Clone) continue;
        const Vec2 g = stats.mean_grad(i);
        const Vec2 pixel_grad{g.x / ctx.stats_scale.x, g.y / ctx.stats_scale.y};
        next.push_back(clone(scene.gaussians[i], pixel_grad, ctx.lr_pos));
        map.push_back(-1);
        ++report.n_clone;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (actions[i] != DensifyAction::Split) continue;
        for (const Gaussian2D& child : split(scene.gaussians[i], cfg.split_factor, rng)) {
            next.push_back(child);
            map.push_back(-1);
        }
        ++report.n_split;
    }
    scene.gaussians = std::move(next);

    const PruneResult pruned = prune(scene, cfg);
    std::vector<std::ptrdiff_t> composed(pruned.index_map.size());
    for (std::size_t j = 0; j < composed.size(); ++j)
        composed[j] = map[static_cast<std::size_t>(pruned.index_map[j])];
    report.n_pruned = pruned.removed.size();
    report.n_total_after = scene.size();

    stats.reset(scene.size());
    optimizer.resize_for_mutation(composed);
    return report;
}

void reset_opacity(Scene& scene, AdamOptimizer& optimizer, double max_opacity) {
    const double cap = logit(max_opacity);
    for (Gaussian2D& g : scene.gaussians) g.logit_opacity = std::min(g.logit_opacity, cap);
    optimizer.reset_opacity_moments();
}

} // namespace splat2d
