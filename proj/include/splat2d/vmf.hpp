#pragma once

#include <vector>

#include "splat2d/rng.hpp"

namespace splat2d::vmf {

/// Circular von Mises-Fisher distribution; kappa = 0 is uniform.
struct VmfParams {
    double mean_direction = 0.0; ///< radians
    double kappa = 0.0;
};

inline constexpr double kBesselMaxArgument = 50.0;

/// Modified Bessel function of the first kind, order 0 or 1, by power series
/// on [0, 50]. Throws std::domain_error outside that range or for other orders.
double bessel_i(int order, double x);

/// I1(kappa) / I0(kappa): the mean resultant length of a circular vMF.
double bessel_ratio(double kappa);

/// exp(kappa cos(theta - m)) / (2 pi I0(kappa))
double density(const VmfParams& params, double theta);

/// Best-Fisher rejection sampler (wrapped-Cauchy envelope). Angles in [0, 2pi).
std::vector<double> sample(const VmfParams& params, int n, Rng& rng);

struct ConsistencyCheck {
    double empirical = 0.0;  ///< coherence ratio of unit vectors at sampled angles
    double analytic = 0.0;   ///< I1 / I0
    double asymptotic = 0.0; ///< 1 - 1 / (2 kappa)
};

/// Feed n unit-norm vMF directions through the gradient-statistics
/// coherence ratio and report it alongside the Bessel ratio.
ConsistencyCheck check_consistency_relation(double kappa, int n_samples, Rng& rng);

} // namespace splat2d::vmf
