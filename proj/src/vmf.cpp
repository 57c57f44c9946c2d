#include "splat2d/vmf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "splat2d/grad_stats.hpp"

namespace splat2d::vmf {

double bessel_i(int order, double x) {
    if (order != 0 && order != 1) throw std::domain_error("bessel_i: only orders 0 and 1 are supported");
    if (!(x >= 0.0 && x <= kBesselMaxArgument))
        throw std::domain_error("bessel_i: argument " + std::to_string(x) + " outside [0, 50]");

    const double half = 0.5 * x;
    const double half_sq = half * half;
    // k = 0 term: (x/2)^n / n!
    double term = order == 0 ? 1.0 : half;
    double sum = term;
    for (int k = 0; k < 500; ++k) {
        term *= half_sq / (static_cast<double>(k + 1) * static_cast<double>(k + 1 + order));
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return sum;
}

double bessel_ratio(double kappa) { return bessel_i(1, kappa) / bessel_i(0, kappa); }

double density(const VmfParams& params, double theta) {
    return std::exp(params.kappa * std::cos(theta - params.mean_direction)) /
           (2.0 * std::numbers::pi * bessel_i(0, params.kappa));
}

namespace {
double wrap_angle(double theta) {
    const double two_pi = 2.0 * std::numbers::pi;
    theta = std::fmod(theta, two_pi);
    if (theta < 0.0) theta += two_pi;
    return theta >= two_pi ? 0.0 : theta;
}
} // namespace

std::vector<double> sample(const VmfParams& params, int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("vmf::sample: n must be >= 1");
    if (params.kappa < 0.0) throw std::invalid_argument("vmf::sample: kappa must be >= 0");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));

    const double kappa = params.kappa;
    if (kappa < 1e-8) {
        for (int i = 0; i < n; ++i) out.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
        return out;
    }

    const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
    const double r = (1.0 + rho * rho) / (2.0 * rho);

    while (static_cast<int>(out.size()) < n) {
        const double u1 = rng.uniform();
        const double u2 = rng.uniform();
        const double u3 = rng.uniform();
        const double z = std::cos(std::numbers::pi * u1);
        const double f = (1.0 + r * z) / (r + z);
        const double c = kappa * (r - f);
        const bool accept = c * (2.0 - c) - u2 > 0.0 || (u2 > 0.0 && std::log(c / u2) + 1.0 - c >= 0.0);
        if (!accept) continue;
        const double offset = std::acos(std::clamp(f, -1.0, 1.0));
        out.push_back(wrap_angle(params.mean_direction + (u3 > 0.5 ? offset : -offset)));
    }
    return out;
}

ConsistencyCheck check_consistency_relation(double kappa, int n_samples, Rng& rng) {
    if (!(kappa > 0.0)) throw std::invalid_argument("check_consistency_relation: kappa must be > 0");
    const auto angles = sample({0.0, kappa}, n_samples, rng);
    GradStats stats(1);
    for (double theta : angles) stats.accumulate(0, {std::cos(theta), std::sin(theta)});
    stats.finish_step();
    return {stats.gcr(0), bessel_ratio(kappa), 1.0 - 1.0 / (2.0 * kappa)};
}

} // namespace splat2d::vmf
