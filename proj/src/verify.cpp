#include "splat2d/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace splat2d {

Scene random_scene(int width, int height, int max_gaussians, Rng& rng) {
    Scene scene;
    const int n = 1 + static_cast<int>(rng.uniform() * max_gaussians) % max_gaussians;
    for (int i = 0; i < n; ++i) {
        Gaussian2D g;
        g.mu = {rng.uniform(0.0, width), rng.uniform(0.0, height)};
        g.log_scale = {std::log(rng.uniform(1.5, 5.0)), std::log(rng.uniform(1.5, 5.0))};
        g.rotation = rng.uniform(-std::numbers::pi, std::numbers::pi);
        g.logit_opacity = logit(rng.uniform(0.1, 0.9));
        g.color = {rng.uniform(), rng.uniform(), rng.uniform()};
        g.depth = rng.uniform();
        scene.gaussians.push_back(g);
    }
    scene.background = {rng.uniform(), rng.uniform(), rng.uniform()};
    return scene;
}

Image random_image(int width, int height, Rng& rng) {
    Image image(width, height);
    for (double& v : image.data()) v = rng.uniform();
    return image;
}

double& parameter(Gaussian2D& g, int k) {
    switch (k) {
    case 0: return g.mu.x;
    case 1: return g.mu.y;
    case 2: return g.log_scale.x;
    case 3: return g.log_scale.y;
    case 4: return g.rotation;
    case 5: return g.logit_opacity;
    case 6: case 7: case 8: return g.color[static_cast<std::size_t>(k - 6)];
    }
    throw std::out_of_range("parameter index out of range");
}

double parameter(const GaussianGrad& g, int k) {
    switch (k) {
    case 0: return g.mu.x;
    case 1: return g.mu.y;
    case 2: return g.log_scale.x;
    case 3: return g.log_scale.y;
    case 4: return g.rotation;
    case 5: return g.logit_opacity;
    case 6: case 7: case 8: return g.color[static_cast<std::size_t>(k - 6)];
    }
    throw std::out_of_range("parameter index out of range");
}

GradientCheck gradient_check(int scenes, int width, int height, LossKind kind, double h, std::uint64_t seed) {
    RasterOptions smooth;
    smooth.min_density = 0.0;
    smooth.min_transmittance = 0.0;
    Rng rng(seed);
    GradientCheck out;
    for (int s = 0; s < scenes; ++s) {
        Scene scene = random_scene(width, height, 5, rng);
        const Image target = random_image(width, height, rng);
        std::vector<PixelSubgradient> stream;
        const Image rendered = render(scene, width, height, smooth);
        const BackwardResult analytic =
            render_backward(scene, rendered, target, kind, smooth, {nullptr, {1.0, 1.0}, &stream});

        auto loss_at = [&](std::size_t i, int k, double value) {
            Scene probe = scene;
            parameter(probe.gaussians[i], k) = value;
            return compute_loss(render(probe, width, height, smooth), target, kind);
        };
        for (std::size_t i = 0; i < scene.size(); ++i) {
            for (int k = 0; k < kParamsPerGaussian; ++k) {
                const double x = parameter(scene.gaussians[i], k);
                const double numeric = (loss_at(i, k, x + h) - loss_at(i, k, x - h)) / (2.0 * h);
                const double err = std::abs(parameter(analytic.grads[i], k) - numeric) /
                                   std::max(std::abs(numeric), 1e-6);
                out.max_relative_error = std::max(out.max_relative_error, err);
                ++out.parameters;
            }
        }

        std::vector<Vec2> summed(scene.size());
        for (const auto& sub : stream) summed[sub.gaussian_index] += sub.grad;
        for (std::size_t i = 0; i < scene.size(); ++i) {
            const double err = norm(summed[i] - analytic.grads[i].mu) / std::max(norm(analytic.grads[i].mu), 1e-12);
            out.max_subgradient_error = std::max(out.max_subgradient_error, err);
        }
        ++out.scenes;
    }
    return out;
}

std::vector<VmfCheckRow> vmf_check(const std::vector<double>& kappas, int samples, std::uint64_t seed) {
    std::vector<VmfCheckRow> rows;
    Rng rng(seed);
    for (double kappa : kappas) rows.push_back({kappa, vmf::check_consistency_relation(kappa, samples, rng)});
    return rows;
}

} // namespace splat2d
