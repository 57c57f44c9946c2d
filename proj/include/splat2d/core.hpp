#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace splat2d {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    constexpr Vec2& operator-=(const Vec2& o) {
        x -= o.x;
        y -= o.y;
        return *this;
    }
    constexpr Vec2& operator*=(double s) {
        x *= s;
        y *= s;
        return *this;
    }
    friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
    friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

inline double norm(const Vec2& v) { return std::sqrt(v.x * v.x + v.y * v.y); }
constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

using Rgb = std::array<double, 3>;

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct Sym2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    constexpr double det() const { return xx * yy - xy * xy; }
    constexpr Sym2 inverse() const {
        const double d = det();
        return {yy / d, -xy / d, xx / d};
    }
    constexpr Vec2 apply(const Vec2& v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
    constexpr double quad(const Vec2& v) const { return dot(v, apply(v)); }
    /// Eigenvalues, largest first.
    std::array<double, 2> eigenvalues() const;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// One anisotropic splat living directly in image space.
///
/// Scales are stored as natural logs of the per-axis standard deviations and
/// opacity as a logit, so optimizer updates stay unconstrained. `depth` is a
/// fixed compositing key; smaller depth is drawn in front.
struct Gaussian2D {
    Vec2 mu;
    Vec2 log_scale;
    double rotation = 0.0;
    double logit_opacity = 0.0;
    Rgb color{0.0, 0.0, 0.0};
    double depth = 0.0;

    double opacity() const { return sigmoid(logit_opacity); }
    Vec2 scale() const { return {std::exp(log_scale.x), std::exp(log_scale.y)}; }
    double max_scale() const { return std::exp(std::max(log_scale.x, log_scale.y)); }

    friend bool operator==(const Gaussian2D&, const Gaussian2D&) = default;
};

struct Scene {
    std::vector<Gaussian2D> gaussians;
    Rgb background{0.0, 0.0, 0.0};

    std::size_t size() const { return gaussians.size(); }

    friend bool operator==(const Scene&, const Scene&) = default;
};

/// R diag(exp(log_scale))^2 R^T.
Sym2 covariance(const Vec2& log_scale, double rotation);
inline Sym2 covariance(const Gaussian2D& g) { return covariance(g.log_scale, g.rotation); }

/// Unnormalized density exp(-0.5 (x - mu)^T Sigma^-1 (x - mu)).
double eval_gaussian(const Gaussian2D& g, const Vec2& x);

/// Indices of the scene sorted by ascending depth, ties broken by index.
std::vector<std::size_t> compositing_order(const Scene& scene);

} // namespace splat2d
