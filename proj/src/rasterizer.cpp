#include "splat2d/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>

namespace splat2d {

LossKind parse_loss_kind(std::string_view name) {
    if (name == "l1" || name == "L1") return LossKind::L1;
    if (name == "mse" || name == "MSE") return LossKind::MSE;
    throw std::invalid_argument("unknown loss kind '" + std::string(name) + "' (expected l1 or mse)");
}

std::string_view to_string(LossKind kind) { return kind == LossKind::L1 ? "l1" : "mse"; }

namespace {

/// Per-Gaussian data decoded once per pass.
struct Footprint {
    Vec2 mu;
    double cos_r = 1.0;
    double sin_r = 0.0;
    double inv_s0 = 1.0;
    double inv_s1 = 1.0;
    double opacity = 0.0;
    Sym2 inv_cov;
    int y0 = 0, y1 = -1; // inclusive candidate rows
};

class RasterPlan {
public:
    RasterPlan(const Scene& scene, int width, int height, const RasterOptions& options)
        : width_(width), height_(height) {
        if (width < 1 || height < 1) throw RasterError("render: width and height must be >= 1");
        if (width > 65535 || height > 65535) throw RasterError("render: width and height must be <= 65535");
        // G(x) >= min_density  <=>  q(x) <= max_quad
        max_quad_ = options.min_density > 0.0 ? -2.0 * std::log(options.min_density)
                                              : std::numeric_limits<double>::infinity();
        order_ = compositing_order(scene);
        footprints_.resize(scene.size());
        for (std::size_t idx = 0; idx < scene.size(); ++idx) {
            const Gaussian2D& g = scene.gaussians[idx];
            Footprint& f = footprints_[idx];
            f.mu = g.mu;
            f.cos_r = std::cos(g.rotation);
            f.sin_r = std::sin(g.rotation);
            f.inv_s0 = std::exp(-g.log_scale.x);
            f.inv_s1 = std::exp(-g.log_scale.y);
            f.opacity = g.opacity();
            const double a = f.inv_s0 * f.inv_s0;
            const double b = f.inv_s1 * f.inv_s1;
            f.inv_cov = {f.cos_r * f.cos_r * a + f.sin_r * f.sin_r * b, f.cos_r * f.sin_r * (a - b),
                         f.sin_r * f.sin_r * a + f.cos_r * f.cos_r * b};
            if (!std::isfinite(max_quad_)) {
                f.y0 = 0;
                f.y1 = height - 1;
                continue;
            }
            // Rows the ellipse q <= max_quad can reach, widened by one against rounding.
            const double hy = std::sqrt(max_quad_ * covariance(g).yy);
            const double lo = std::ceil(g.mu.y - hy - 0.5) - 1.0;
            const double hi = std::floor(g.mu.y + hy - 0.5) + 1.0;
            if (!(hi >= 0.0 && lo <= height - 1)) continue;
            f.y0 = static_cast<int>(std::max(lo, 0.0));
            f.y1 = static_cast<int>(std::min(hi, static_cast<double>(height - 1)));
        }
    }

    int width() const { return width_; }
    int height() const { return height_; }
    double max_quad() const { return max_quad_; }
    const std::vector<std::size_t>& order() const { return order_; }
    const Footprint& footprint(std::size_t i) const { return footprints_[i]; }

    /// Visit (x, density) for every pixel of row y inside the ellipse
    /// q <= max_quad. Inside a row q is quadratic in x, so the density
    /// follows a two-term product recurrence from the first pixel.
    template <class Visit>
    void visit_row(const Footprint& f, int y, Visit&& visit) const {
        const double dy = y + 0.5 - f.mu.y;
        const Sym2& m = f.inv_cov;
        if (!std::isfinite(max_quad_)) {
            for (int x = 0; x < width_; ++x) {
                const double dx = x + 0.5 - f.mu.x;
                const double u0 = (f.cos_r * dx + f.sin_r * dy) * f.inv_s0;
                const double u1 = (-f.sin_r * dx + f.cos_r * dy) * f.inv_s1;
                visit(x, std::exp(-0.5 * (u0 * u0 + u1 * u1)));
            }
            return;
        }
        const double disc = m.xy * m.xy * dy * dy - m.xx * (m.yy * dy * dy - max_quad_);
        if (!(disc >= 0.0)) return;
        const double root = std::sqrt(disc);
        const double lo = std::ceil(f.mu.x + (-m.xy * dy - root) / m.xx - 0.5);
        const double hi = std::floor(f.mu.x + (-m.xy * dy + root) / m.xx - 0.5);
        const int x0 = static_cast<int>(std::max(lo, 0.0));
        const int x1 = static_cast<int>(std::min(hi, static_cast<double>(width_ - 1)));
        if (x0 > x1) return;
        const double dx = x0 + 0.5 - f.mu.x;
        const double q = m.xx * dx * dx + 2.0 * m.xy * dx * dy + m.yy * dy * dy;
        double density = std::exp(-0.5 * q);
        double ratio = std::exp(-0.5 * (m.xx * (2.0 * dx + 1.0) + 2.0 * m.xy * dy));
        const double step = std::exp(-m.xx);
        for (int x = x0;;) {
            visit(x, density);
            if (++x > x1) break;
            density *= ratio;
            ratio *= step;
        }
    }

private:
    int width_;
    int height_;
    double max_quad_ = 0.0;
    std::vector<std::size_t> order_;
    std::vector<Footprint> footprints_;
};

/// Run body(row_begin, row_end, worker) over contiguous row bands.
template <class Body>
void for_row_bands(int height, int workers, Body&& body) {
    if (workers == 1) {
        body(0, height, 0);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        const int begin = height * w / workers;
        const int end = height * (w + 1) / workers;
        pool.emplace_back([&body, begin, end, w] { body(begin, end, w); });
    }
    for (auto& t : pool) t.join();
}

int worker_count(const RasterOptions& options, int height) { return std::clamp(options.threads, 1, height); }

/// Front-to-back compositing of one row band, splat by splat. Per pixel the
/// arithmetic is the same sequence as compositing that pixel on its own.
void forward_band(const Scene& scene, const RasterPlan& plan, const RasterOptions& options, ForwardTrace::Band& band,
                  std::vector<double>& transmittance, std::vector<double>& accum) {
    const int width = plan.width();
    const double min_t = options.min_transmittance;
    const auto& order = plan.order();
    band.offsets.assign(order.size() + 1, 0);
    band.entries.clear();
    for (std::size_t k = 0; k < order.size(); ++k) {
        band.offsets[k] = static_cast<std::uint32_t>(band.entries.size());
        const Footprint& f = plan.footprint(order[k]);
        const Rgb& color = scene.gaussians[order[k]].color;
        const int y0 = std::max(f.y0, band.row_begin);
        const int y1 = std::min(f.y1, band.row_end - 1);
        for (int y = y0; y <= y1; ++y) {
            const std::size_t row = static_cast<std::size_t>(y) * width;
            plan.visit_row(f, y, [&](int x, double density) {
                double& t = transmittance[row + x];
                if (t < min_t) return;
                const double alpha = f.opacity * density;
                const double w = alpha * t;
                double* acc = &accum[3 * (row + x)];
                acc[0] += color[0] * w;
                acc[1] += color[1] * w;
                acc[2] += color[2] * w;
                band.entries.push_back({static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), density, t});
                t *= 1.0 - alpha;
            });
        }
    }
    band.offsets[order.size()] = static_cast<std::uint32_t>(band.entries.size());
}

Image forward(const Scene& scene, const RasterPlan& plan, const RasterOptions& options, ForwardTrace& trace) {
    const int width = plan.width();
    const int height = plan.height();
    const std::size_t pixels = static_cast<std::size_t>(width) * height;
    const int workers = worker_count(options, height);
    trace.width = width;
    trace.height = height;
    trace.order = plan.order();
    trace.bands.resize(static_cast<std::size_t>(workers));
    trace.final_transmittance.assign(pixels, 1.0);
    std::vector<double> accum(3 * pixels, 0.0);

    for_row_bands(height, workers, [&](int row_begin, int row_end, int w) {
        ForwardTrace::Band& band = trace.bands[static_cast<std::size_t>(w)];
        band.row_begin = row_begin;
        band.row_end = row_end;
        forward_band(scene, plan, options, band, trace.final_transmittance, accum);
    });

    Image image(width, height);
    const Rgb& bg = scene.background;
    for (std::size_t p = 0; p < pixels; ++p) {
        const double t = trace.final_transmittance[p];
        for (int c = 0; c < 3; ++c) image.data()[3 * p + c] = accum[3 * p + c] + t * bg[c];
    }
    return image;
}

/// Per-worker output of a backward sweep.
struct BackwardPartial {
    ParamGrads grads;
    GradStats stats;
    std::vector<PixelSubgradient> stream;
};

void backward_band(const Scene& scene, const RasterPlan& plan, const ForwardTrace& trace,
                   const ForwardTrace::Band& band, const std::vector<double>& dl_dc, const std::vector<char>& active,
                   bool want_stats, const Vec2& stats_scale, bool want_stream, BackwardPartial& out) {
    const int width = plan.width();
    const Rgb& bg = scene.background;
    // Light arriving from behind the current splat, per pixel of the band.
    const std::size_t first = static_cast<std::size_t>(band.row_begin) * width;
    const std::size_t last = static_cast<std::size_t>(band.row_end) * width;
    std::vector<double> behind(3 * (last - first));
    for (std::size_t p = first; p < last; ++p)
        for (int c = 0; c < 3; ++c) behind[3 * (p - first) + c] = trace.final_transmittance[p] * bg[c];

    const auto& order = trace.order;
    for (std::size_t k = order.size(); k-- > 0;) {
        const std::size_t i = order[k];
        const Gaussian2D& g = scene.gaussians[i];
        const Footprint& f = plan.footprint(i);
        const Sym2& m = f.inv_cov;
        const double opacity = f.opacity;
        const double mx = f.mu.x - 0.5;
        const double my = f.mu.y - 0.5;

        // Moments of dL/dG * G over the offsets d = pixel centre - mu; the
        // mean, scale and rotation gradients are linear in them.
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
        double s_opacity = 0.0;
        Rgb s_color{0.0, 0.0, 0.0};
        Vec2 stat_vec;
        double stat_norm = 0.0;
        bool hit = false;
        for (std::uint32_t e = band.offsets[k]; e < band.offsets[k + 1]; ++e) {
            const ForwardTrace::Entry& entry = band.entries[e];
            const std::size_t p = static_cast<std::size_t>(entry.y) * width + entry.x;
            if (!active[p]) continue;
            const double* g_c = &dl_dc[3 * p];
            double* b = &behind[3 * (p - first)];
            const double t = entry.transmittance;
            const double alpha = opacity * entry.density;
            const double w = alpha * t;
            const double inv_one_minus = 1.0 / (1.0 - alpha);
            double dl_dalpha = 0.0;
            for (int c = 0; c < 3; ++c) {
                s_color[c] += g_c[c] * w;
                dl_dalpha += g_c[c] * (g.color[c] * t - b[c] * inv_one_minus);
                b[c] += g.color[c] * w;
            }
            const double gd = dl_dalpha * entry.density;
            s_opacity += gd;

            const double dx = entry.x - mx;
            const double dy = entry.y - my;
            const double gx = gd * dx;
            const double gy = gd * dy;
            sx += gx;
            sy += gy;
            sxx += gx * dx;
            sxy += gx * dy;
            syy += gy * dy;

            if (want_stats || want_stream) {
                const Vec2 sub{opacity * (m.xx * gx + m.xy * gy), opacity * (m.xy * gx + m.yy * gy)};
                if (want_stats) {
                    const Vec2 scaled{sub.x * stats_scale.x, sub.y * stats_scale.y};
                    stat_vec += scaled;
                    stat_norm += norm(scaled);
                    hit = true;
                }
                if (want_stream) out.stream.push_back({i, entry.x, entry.y, sub});
            }
        }

        const double c = f.cos_r;
        const double sn = f.sin_r;
        const double r00 = c * c * sxx + 2.0 * c * sn * sxy + sn * sn * syy; // sum gd r0^2
        const double r11 = sn * sn * sxx - 2.0 * c * sn * sxy + c * c * syy; // sum gd r1^2
        const double r01 = c * sn * (syy - sxx) + (c * c - sn * sn) * sxy;   // sum gd r0 r1
        const double is0 = f.inv_s0 * f.inv_s0;
        const double is1 = f.inv_s1 * f.inv_s1;

        GaussianGrad& dst = out.grads[i];
        dst.mu += Vec2{opacity * (m.xx * sx + m.xy * sy), opacity * (m.xy * sx + m.yy * sy)};
        dst.log_scale += Vec2{opacity * r00 * is0, opacity * r11 * is1};
        dst.rotation -= opacity * r01 * (is0 - is1);
        dst.logit_opacity += s_opacity * opacity * (1.0 - opacity);
        for (int ch = 0; ch < 3; ++ch) dst.color[ch] += s_color[ch];
        if (hit) out.stats.accumulate_sum(i, stat_vec, stat_norm);
    }
}

void check_same_shape(const Image& a, const Image& b) {
    if (!a.same_shape(b))
        throw RasterError("image dimension mismatch: " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                          " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
}

} // namespace

Image render(const Scene& scene, int width, int height, const RasterOptions& options, ForwardTrace* trace) {
    const RasterPlan plan(scene, width, height, options);
    ForwardTrace local;
    return forward(scene, plan, options, trace ? *trace : local);
}

double compute_loss(const Image& rendered, const Image& target, LossKind kind) {
    check_same_shape(rendered, target);
    const auto& a = rendered.data();
    const auto& b = target.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double r = a[i] - b[i];
        sum += kind == LossKind::L1 ? std::abs(r) : r * r;
    }
    return a.empty() ? 0.0 : sum / static_cast<double>(a.size());
}

BackwardResult render_backward(const Scene& scene, const Image& rendered, const Image& target, LossKind kind,
                               const RasterOptions& options, const SubgradientSinks& sinks,
                               const ForwardTrace* trace) {
    check_same_shape(rendered, target);
    if (sinks.stats && sinks.stats->size() != scene.size())
        throw RasterError("render_backward: GradStats sized " + std::to_string(sinks.stats->size()) + " for " +
                          std::to_string(scene.size()) + " Gaussians");
    const int width = rendered.width();
    const int height = rendered.height();
    const RasterPlan plan(scene, width, height, options);
    ForwardTrace local;
    if (trace) {
        if (trace->width != width || trace->height != height || trace->order.size() != scene.size())
            throw RasterError("render_backward: forward trace does not match the scene");
    } else {
        forward(scene, plan, options, local);
        trace = &local;
    }
    const std::size_t n = scene.size();
    const bool want_stats = sinks.stats != nullptr;
    const bool want_stream = sinks.stream != nullptr;

    BackwardResult result;
    result.loss = compute_loss(rendered, target, kind);

    const std::size_t pixels = static_cast<std::size_t>(width) * height;
    const double inv_count = 1.0 / static_cast<double>(3 * pixels);
    std::vector<double> dl_dc(3 * pixels);
    std::vector<char> active(pixels, 0);
    for (std::size_t p = 0; p < pixels; ++p) {
        for (int c = 0; c < 3; ++c) {
            const double r = rendered.data()[3 * p + c] - target.data()[3 * p + c];
            const double d = kind == LossKind::L1 ? (r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0)) * inv_count
                                                  : 2.0 * r * inv_count;
            dl_dc[3 * p + c] = d;
            if (d != 0.0) active[p] = 1;
        }
    }

    const std::size_t bands = trace->bands.size();
    if (bands == 1) {
        // Reference path: fold straight into the caller's buffers.
        BackwardPartial partial;
        partial.grads.assign(n, GaussianGrad{});
        if (want_stats) partial.stats = std::move(*sinks.stats);
        backward_band(scene, plan, *trace, trace->bands[0], dl_dc, active, want_stats, sinks.stats_scale, want_stream,
                      partial);
        result.grads = std::move(partial.grads);
        if (want_stats) {
            *sinks.stats = std::move(partial.stats);
            sinks.stats->finish_step();
        }
        if (want_stream)
            sinks.stream->insert(sinks.stream->end(), partial.stream.begin(), partial.stream.end());
        return result;
    }

    std::vector<BackwardPartial> partials(bands);
    for (auto& p : partials) {
        p.grads.assign(n, GaussianGrad{});
        if (want_stats) p.stats.reset(n);
    }
    for_row_bands(height, static_cast<int>(bands), [&](int, int, int w) {
        const auto b = static_cast<std::size_t>(w);
        backward_band(scene, plan, *trace, trace->bands[b], dl_dc, active, want_stats, sinks.stats_scale, want_stream,
                      partials[b]);
    });

    // Merge in band order so the result depends only on the worker count.
    result.grads.assign(n, GaussianGrad{});
    for (const auto& p : partials) {
        for (std::size_t i = 0; i < n; ++i) {
            GaussianGrad& dst = result.grads[i];
            const GaussianGrad& src = p.grads[i];
            dst.mu += src.mu;
            dst.log_scale += src.log_scale;
            dst.rotation += src.rotation;
            dst.logit_opacity += src.logit_opacity;
            for (int c = 0; c < 3; ++c) dst.color[c] += src.color[c];
        }
        if (want_stats) sinks.stats->absorb(p.stats);
        if (want_stream) sinks.stream->insert(sinks.stream->end(), p.stream.begin(), p.stream.end());
    }
    if (want_stats) sinks.stats->finish_step();
    return result;
}

PixelTrace trace_pixel(const Scene& scene, int width, int height, int x, int y, const RasterOptions& options) {
    if (x < 0 || y < 0 || x >= width || y >= height) throw RasterError("trace_pixel: pixel outside the image");
    const RasterPlan plan(scene, width, height, options);
    PixelTrace trace;
    double t = 1.0;
    for (std::size_t i : plan.order()) {
        if (t < options.min_transmittance) break;
        const Footprint& f = plan.footprint(i);
        if (y < f.y0 || y > f.y1) continue;
        plan.visit_row(f, y, [&](int px, double density) {
            if (px != x) return;
            const double alpha = f.opacity * density;
            trace.contributions.push_back({i, x, y, density, alpha, t});
            t *= 1.0 - alpha;
        });
    }
    trace.final_transmittance = t;
    return trace;
}

} // namespace splat2d
