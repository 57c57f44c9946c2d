#include "splat2d/core.hpp"

#include <algorithm>
#include <numeric>

namespace splat2d {

std::array<double, 2> Sym2::eigenvalues() const {
    const double mean = 0.5 * (xx + yy);
    const double half_diff = 0.5 * (xx - yy);
    const double r = std::sqrt(half_diff * half_diff + xy * xy);
    return {mean + r, mean - r};
}

Sym2 covariance(const Vec2& log_scale, double rotation) {
    const double c = std::cos(rotation);
    const double s = std::sin(rotation);
    const double v0 = std::exp(2.0 * log_scale.x);
    const double v1 = std::exp(2.0 * log_scale.y);
    return {c * c * v0 + s * s * v1, c * s * (v0 - v1), s * s * v0 + c * c * v1};
}

double eval_gaussian(const Gaussian2D& g, const Vec2& x) {
    // Evaluate in the splat's own frame: u = R^T (x - mu).
    const double c = std::cos(g.rotation);
    const double s = std::sin(g.rotation);
    const Vec2 d = x - g.mu;
    const double u0 = (c * d.x + s * d.y) * std::exp(-g.log_scale.x);
    const double u1 = (-s * d.x + c * d.y) * std::exp(-g.log_scale.y);
    return std::exp(-0.5 * (u0 * u0 + u1 * u1));
}

std::vector<std::size_t> compositing_order(const Scene& scene) {
    std::vector<std::size_t> order(scene.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scene.gaussians[a].depth < scene.gaussians[b].depth;
    });
    return order;
}

} // namespace splat2d
