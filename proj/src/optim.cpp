#include "splat2d/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace splat2d {

double lr_pos(const LearningRates& rates, int iteration) {
    if (iteration < 0) throw std::invalid_argument("lr_pos: iteration must be >= 0");
    if (rates.position_max_steps <= 0) return rates.position_final;
    const double t = std::clamp(static_cast<double>(iteration) / rates.position_max_steps, 0.0, 1.0);
    if (t == 0.0) return rates.position_init;
    if (t == 1.0) return rates.position_final;
    return std::exp(std::log(rates.position_init) * (1.0 - t) + std::log(rates.position_final) * t);
}

AdamOptimizer::AdamOptimizer(const LearningRates& rates, std::size_t n)
    : rates_(rates), m_(n, Moments{}), v_(n, Moments{}) {}

void AdamOptimizer::step(std::span<Gaussian2D> params, std::span<const GaussianGrad> grads, int iteration) {
    if (params.size() != grads.size() || params.size() != m_.size())
        throw std::invalid_argument("AdamOptimizer::step: shape mismatch (params " + std::to_string(params.size()) +
                                    ", grads " + std::to_string(grads.size()) + ", state " +
                                    std::to_string(m_.size()) + ")");
    ++t_;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    const double lr_mu = lr_pos(rates_, iteration);
    const std::array<double, kParams> lr{lr_mu,          lr_mu,          rates_.log_scale,
                                         rates_.log_scale, rates_.rotation, rates_.opacity,
                                         rates_.color,    rates_.color,    rates_.color};

    for (std::size_t i = 0; i < params.size(); ++i) {
        Gaussian2D& g = params[i];
        const GaussianGrad& d = grads[i];
        const std::array<double, kParams> grad{d.mu.x,     d.mu.y,          d.log_scale.x, d.log_scale.y, d.rotation,
                                               d.logit_opacity, d.color[0], d.color[1],    d.color[2]};
        std::array<double*, kParams> value{&g.mu.x,     &g.mu.y,          &g.log_scale.x, &g.log_scale.y, &g.rotation,
                                           &g.logit_opacity, &g.color[0], &g.color[1],    &g.color[2]};
        Moments& m = m_[i];
        Moments& v = v_[i];
        for (std::size_t k = 0; k < kParams; ++k) {
            m[k] = kBeta1 * m[k] + (1.0 - kBeta1) * grad[k];
            v[k] = kBeta2 * v[k] + (1.0 - kBeta2) * grad[k] * grad[k];
            const double m_hat = m[k] / bc1;
            const double v_hat = v[k] / bc2;
            *value[k] -= lr[k] * m_hat / (std::sqrt(v_hat) + kEpsilon);
        }
        for (double& c : g.color) c = std::clamp(c, 0.0, 1.0);
    }
}

void AdamOptimizer::resize_for_mutation(std::span<const std::ptrdiff_t> index_map) {
    std::vector<unsigned char> seen(m_.size(), 0);
    std::vector<Moments> m(index_map.size(), Moments{});
    std::vector<Moments> v(index_map.size(), Moments{});
    for (std::size_t j = 0; j < index_map.size(); ++j) {
        const std::ptrdiff_t src = index_map[j];
        if (src < 0) continue;
        const auto s = static_cast<std::size_t>(src);
        if (s >= m_.size())
            throw std::invalid_argument("resize_for_mutation: source slot " + std::to_string(src) + " out of range");
        if (seen[s]) throw std::invalid_argument("resize_for_mutation: slot " + std::to_string(src) + " mapped twice");
        seen[s] = 1;
        m[j] = m_[s];
        v[j] = v_[s];
    }
    m_ = std::move(m);
    v_ = std::move(v);
}

void AdamOptimizer::reset_opacity_moments() {
    for (std::size_t i = 0; i < m_.size(); ++i) {
        m_[i][5] = 0.0;
        v_[i][5] = 0.0;
    }
}

} // namespace splat2d
